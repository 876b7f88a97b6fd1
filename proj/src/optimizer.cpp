#include "vts/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "vts/error.hpp"

namespace vts {

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Converged: return "converged";
    case StopReason::Stalled: return "stalled";
    case StopReason::MaxIterations: return "max_iterations";
  }
  return "?";
}

void OptimizerConfig::validate() const {
  if (!(delta0 > 0.0)) throw Error(ErrorCode::NonPositiveDelta, "delta0 must be positive");
  if (!(growth > 1.0)) throw Error(ErrorCode::InvalidArgument, "growth must exceed 1");
  if (!(improvement_threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "improvement threshold must be positive");
  if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
  if (M < 1) throw Error(ErrorCode::InvalidArgument, "M must be >= 1");
  if (stop_mode == StopMode::AccuracyVsOracle && !(epsilon > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  }
  if (stall_cycle < 0) throw Error(ErrorCode::InvalidArgument, "stall_cycle must be >= 0");
  if (quantization && quantization->digits < 0) throw Error(ErrorCode::InvalidArgument, "negative quantization digits");
}

double adapt_delta(double loss_prev, double loss_curr, double delta, const OptimizerConfig& config) {
  if (!(delta > 0.0)) throw Error(ErrorCode::NonPositiveDelta, "delta must be positive");
  const bool increased = loss_curr > loss_prev;
  const double denominator = loss_prev + loss_curr;
  // Both losses zero: no improvement is possible, treat as stagnant.
  const double relative = denominator > 0.0 ? 2.0 * (loss_prev - loss_curr) / denominator : 0.0;
  if (config.rule_exclusive && increased) return delta / config.growth;
  if (relative < config.improvement_threshold) delta *= config.growth;
  if (increased) delta /= config.growth;
  return delta;
}

ParameterVector step(const ParameterVector& params, const RealVector& gradient, double delta,
                     const std::optional<QuantizationSpec>& quantization) {
  if (gradient.size() != params.size()) throw Error(ErrorCode::LengthMismatch, "gradient length differs from parameters");
  ParameterVector next = params;
  next.values -= delta * gradient;
  if (quantization) return quantize(next, *quantization);
  return next;
}

Spectrum eigenvalues_from_diagonal(const ComplexVector& t_diag, const ComplexVector* s_diag) {
  Spectrum out(t_diag);
  if (s_diag == nullptr) return out;
  for (Eigen::Index k = 0; k < t_diag.size(); ++k) {
    const double t = std::abs(t_diag(k));
    const double s = std::abs((*s_diag)(k));
    auto& slot = out.slots[static_cast<std::size_t>(k)];
    if (s < kDiagonalFloor && t < kDiagonalFloor) {
      slot = SlotState::Indeterminate;
      out.values(k) = Complex{0.0, 0.0};
    } else if (s < kDiagonalFloor) {
      slot = SlotState::Infinite;
      out.values(k) = Complex{0.0, 0.0};
    } else {
      out.values(k) = t_diag(k) / (*s_diag)(k);
    }
  }
  return out;
}

Spectrum extract_eigenvalues(const ProblemInstance& instance, const ParameterVector& params) {
  const TriangularForm form = triangular_form(instance, params);
  if (!form.s) return eigenvalues_from_diagonal(form.t.diagonal(), nullptr);
  const ComplexVector s_diag = form.s->diagonal();
  return eigenvalues_from_diagonal(form.t.diagonal(), &s_diag);
}

Optimizer::Optimizer(ProblemInstance instance, OptimizerConfig config, std::optional<ParameterVector> start)
    : instance_(std::move(instance)),
      config_(std::move(config)),
      evaluator_(instance_, config_.evaluator, config_.seed),
      delta_(config_.delta0) {
  config_.validate();
  if (instance_.qubits() < 1) throw Error(ErrorCode::InvalidArgument, "instance dimension must be a power of two");
  if (instance_.kind == ProblemKind::EV) check_shift_angle(config_.shift_angle);
  params_ = ParameterVector::zeros(instance_.kind, instance_.qubits(), config_.M);
  if (start) {
    if (start->kind != instance_.kind) throw Error(ErrorCode::KindMismatch, "checkpoint kind differs from instance");
    if (start->n != params_.n || start->M != params_.M || start->size() != params_.size()) {
      throw Error(ErrorCode::BadParameterCount, "checkpoint shape differs from instance/config");
    }
    params_ = std::move(*start);
  }
  trace_.kind = instance_.kind;
  trace_.seed = config_.seed;
  trace_.oracle = oracle_spectrum(instance_);
  const Snapshot initial = evaluate(params_, 0);
  loss_curr_ = initial.loss;
  previous_eigenvalues_ = initial.eigenvalues;
  trace_.final_params = params_;
  trace_.t_diagonal = initial.t_diag;
  trace_.s_diagonal = initial.s_diag;
}

Optimizer::Snapshot Optimizer::evaluate(const ParameterVector& params, std::uint64_t iteration) const {
  Snapshot snap;
  const TriangularForm form = triangular_form(instance_, params);
  snap.t_diag = form.t.diagonal();
  if (form.s) snap.s_diag = form.s->diagonal();
  snap.eigenvalues = eigenvalues_from_diagonal(snap.t_diag, form.s ? &snap.s_diag : nullptr);
  if (config_.evaluator.mode == EvaluatorMode::MatrixExact) {
    snap.loss = strictly_lower_mass(form.t) + (form.s ? strictly_lower_mass(*form.s) : 0.0);
  } else {
    snap.loss = evaluator_(params, {iteration, -1, 0});
  }
  return snap;
}

GradientReport Optimizer::gradient_at(const ParameterVector& params, std::uint64_t iteration) const {
  if (config_.evaluator.mode == EvaluatorMode::MatrixExact) {
    return gradient_matrix_exact(instance_, params, config_.shift_angle);
  }
  const LossFunction loss = [this](const ParameterVector& p, const EvalTag& tag) { return evaluator_(p, tag); };
  return gradient(params, loss, config_.shift_angle, iteration);
}

bool Optimizer::satisfied(double epsilon) const {
  if (trace_.rows.empty()) return false;
  const TraceRow& last = trace_.rows.back();
  if (config_.stop_mode == StopMode::AccuracyVsOracle) return last.match_error < epsilon;
  return false;
}

int Optimizer::cycle_period() {
  if (config_.stall_cycle <= 0 || config_.evaluator.mode == EvaluatorMode::Shots) return 0;
  State now{params_.values, delta_, loss_prev_, loss_curr_};
  int period = 0;
  for (std::size_t back = 1; back <= recent_.size(); ++back) {
    if (recent_[recent_.size() - back] == now) {
      period = static_cast<int>(back);
      break;
    }
  }
  recent_.push_back(std::move(now));
  if (recent_.size() > static_cast<std::size_t>(config_.stall_cycle)) recent_.pop_front();
  return period;
}

StopReason Optimizer::advance(double epsilon) {
  if (config_.stop_mode == StopMode::AccuracyVsOracle && satisfied(epsilon)) {
    trace_.stop_reason = StopReason::Converged;
    return trace_.stop_reason;
  }
  const auto start = std::chrono::steady_clock::now();
  while (iteration_ < config_.max_iterations) {
    ++iteration_;
    const auto it = static_cast<std::uint64_t>(iteration_);
    const GradientReport grad = gradient_at(params_, it);
    if (has_prev_) delta_ = adapt_delta(loss_prev_, loss_curr_, delta_, config_);
    params_ = step(params_, grad.partials, delta_, config_.quantization);

    const Snapshot snap = evaluate(params_, it);
    loss_prev_ = loss_curr_;
    loss_curr_ = snap.loss;
    has_prev_ = true;

    TraceRow row;
    row.iteration = iteration_;
    row.loss = snap.loss;
    row.delta = delta_;
    row.eigenvalues = snap.eigenvalues;
    row.match_error = match_error(snap.eigenvalues, trace_.oracle);
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    trace_.rows.push_back(std::move(row));
    trace_.final_params = params_;
    trace_.t_diagonal = snap.t_diag;
    trace_.s_diagonal = snap.s_diag;

    if (!std::isfinite(snap.loss)) throw Error(ErrorCode::NoConvergence, "loss became non-finite");

    if (config_.stop_mode == StopMode::AccuracyVsOracle) {
      if (trace_.rows.back().match_error < epsilon) {
        trace_.stop_reason = StopReason::Converged;
        return trace_.stop_reason;
      }
    } else {
      const double movement = match_error(snap.eigenvalues, previous_eigenvalues_);
      if (iteration_ > config_.stall_warmup && movement <= config_.stall_threshold) {
        trace_.stop_reason = StopReason::Stalled;
        trace_.stall_period = 1;
        previous_eigenvalues_ = snap.eigenvalues;
        return trace_.stop_reason;
      }
      if (const int period = cycle_period(); period > 0 && iteration_ > config_.stall_warmup) {
        trace_.stop_reason = StopReason::Stalled;
        trace_.stall_period = period;
        previous_eigenvalues_ = snap.eigenvalues;
        return trace_.stop_reason;
      }
    }
    previous_eigenvalues_ = snap.eigenvalues;
  }
  trace_.stop_reason = StopReason::MaxIterations;
  return trace_.stop_reason;
}

OptimizationTrace run(const ProblemInstance& instance, const OptimizerConfig& config,
                      std::optional<ParameterVector> start) {
  Optimizer optimizer(instance, config, std::move(start));
  optimizer.advance();
  return optimizer.take_trace();
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string trace_csv(const OptimizationTrace& trace) {
  std::ostringstream out;
  const Eigen::Index n = trace.oracle.size();
  out << "iteration,loss,delta,match_error";
  for (Eigen::Index k = 0; k < n; ++k) out << ",lambda_re_" << k;
  for (Eigen::Index k = 0; k < n; ++k) out << ",lambda_im_" << k;
  out << "\n";
  for (const TraceRow& row : trace.rows) {
    out << row.iteration << ',' << fmt(row.loss) << ',' << fmt(row.delta) << ',' << fmt(row.match_error);
    for (Eigen::Index k = 0; k < n; ++k) out << ',' << fmt(row.eigenvalues.values(k).real());
    for (Eigen::Index k = 0; k < n; ++k) out << ',' << fmt(row.eigenvalues.values(k).imag());
    out << "\n";
  }
  return out.str();
}

std::string trace_summary_json(const OptimizationTrace& trace, const OptimizerConfig& config) {
  using nlohmann::json;
  json eig = json::array();
  if (!trace.rows.empty()) {
    const Spectrum& s = trace.rows.back().eigenvalues;
    for (Eigen::Index k = 0; k < s.size(); ++k) {
      const SlotState slot = s.slots[static_cast<std::size_t>(k)];
      if (slot == SlotState::Finite) {
        eig.push_back({{"re", s.values(k).real()}, {"im", s.values(k).imag()}});
      } else {
        eig.push_back({{"slot", slot == SlotState::Indeterminate ? "indeterminate" : "infinite"}});
      }
    }
  }
  json cfg = {{"delta0", config.delta0},
              {"growth", config.growth},
              {"improvement_threshold", config.improvement_threshold},
              {"M", config.M},
              {"shift_angle", config.shift_angle},
              {"stop_mode", config.stop_mode == StopMode::AccuracyVsOracle ? "accuracy" : "stall"},
              {"epsilon", config.epsilon},
              {"stall_threshold", config.stall_threshold},
              {"stall_cycle", config.stall_cycle},
              {"max_iterations", config.max_iterations},
              {"evaluator", config.evaluator.str()},
              {"rule_exclusive", config.rule_exclusive}};
  if (config.quantization) cfg["quantization_digits"] = config.quantization->digits;
  json out = {{"stop_reason", to_string(trace.stop_reason)},
              {"kind", to_string(trace.kind)},
              {"iterations", trace.iterations()},
              {"final_loss", trace.final_loss()},
              {"final_match_error", trace.final_match_error()},
              {"eigenvalues", eig},
              {"seed", trace.seed},
              {"stall_period", trace.stall_period},
              {"config", cfg}};
  return out.dump(2);
}

}  // namespace vts
