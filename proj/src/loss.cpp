#include "vts/loss.hpp"

#include <cmath>
#include <cstdio>

#include "vts/circuit.hpp"
#include "vts/error.hpp"

namespace vts {

EvaluatorSpec EvaluatorSpec::parse(const std::string& text) {
  EvaluatorSpec spec;
  if (text == "matrix") return spec;
  if (text == "circuit") {
    spec.mode = EvaluatorMode::CircuitExact;
    return spec;
  }
  if (text.rfind("shots:", 0) == 0) {
    spec.mode = EvaluatorMode::Shots;
    try {
      spec.shots = std::stol(text.substr(6));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad shot count in '" + text + "'");
    }
    if (spec.shots < 1) throw Error(ErrorCode::InvalidArgument, "shot count must be >= 1");
    return spec;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown evaluator '" + text + "'");
}

std::string EvaluatorSpec::str() const {
  switch (mode) {
    case EvaluatorMode::MatrixExact: return "matrix";
    case EvaluatorMode::CircuitExact: return "circuit";
    case EvaluatorMode::Shots: return "shots:" + std::to_string(shots);
  }
  return "?";
}

namespace {

void require_match(const ProblemInstance& instance, const ParameterVector& params) {
  if (instance.kind != params.kind) throw Error(ErrorCode::KindMismatch, "instance and parameter kinds differ");
  if (instance.qubits() != params.n) throw Error(ErrorCode::LayoutMismatch, "instance size differs from parameter n");
}

}  // namespace

TriangularForm triangular_form(const ProblemInstance& instance, const ParameterVector& params) {
  require_match(instance, params);
  const UnitaryPair u = build_unitaries(params);
  TriangularForm form;
  form.t = u.row.transpose() * instance.a * u.col;
  if (instance.b) form.s = u.row.transpose() * (*instance.b) * u.col;
  return form;
}

double pivot_mass(const ProblemInstance& instance) {
  const double amplification = std::pow(2.0, 4 * instance.qubits());
  const double pivot = std::norm(instance.a(0, 0)) + (instance.b ? std::norm((*instance.b)(0, 0)) : 0.0);
  return amplification * pivot;
}

double loss_from_probability(double a_mass, double p1) { return a_mass * p1 / (1.0 - p1); }

LossReport loss_matrix_exact(const ProblemInstance& instance, const ParameterVector& params) {
  const TriangularForm form = triangular_form(instance, params);
  LossReport report;
  report.loss = strictly_lower_mass(form.t) + (form.s ? strictly_lower_mass(*form.s) : 0.0);
  report.a_mass = pivot_mass(instance);
  const double g2 = report.a_mass + report.loss;
  report.p1 = report.loss / g2;
  report.success_p = g2 / std::pow(2.0, 4 * instance.qubits() + 1);
  report.mode = {EvaluatorMode::MatrixExact, 0};
  return report;
}

LossReport loss_circuit(const ProblemInstance& instance, const ParameterVector& params, const EvaluatorSpec& spec,
                        CounterStream* stream) {
  require_match(instance, params);
  if (spec.mode == EvaluatorMode::MatrixExact) return loss_matrix_exact(instance, params);

  const RegisterLayout layout{params.n};
  const GateProgram program = compile_program(params, layout);
  const StateVector out = apply_program(encode_input(instance), program);

  const int b = layout.qubit(Segment::B);
  const int k = layout.qubit(Segment::K);
  LossReport report;
  report.mode = spec;
  report.a_mass = pivot_mass(instance);
  report.success_p = marginal_probability(out, {{b, 1}});
  const double joint = marginal_probability(out, {{b, 1}, {k, 1}});
  report.p1 = joint / report.success_p;

  if (spec.mode == EvaluatorMode::CircuitExact) {
    report.loss = loss_from_probability(report.a_mass, report.p1);
    return report;
  }

  if (spec.shots < 1) throw Error(ErrorCode::InvalidArgument, "shot count must be >= 1");
  if (stream == nullptr) throw Error(ErrorCode::InvalidArgument, "shots mode needs a random stream");
  long successes = 0;
  long flagged = 0;
  for (long shot = 0; shot < spec.shots; ++shot) {
    if (stream->uniform() >= report.success_p) continue;  // B measured 0: discard
    ++successes;
    if (stream->uniform() < report.p1) ++flagged;
  }
  if (successes == 0) throw Error(ErrorCode::NoSuccessfulShots, "every B measurement gave 0");
  if (flagged == successes) throw Error(ErrorCode::NoSuccessfulShots, "every post-selected run gave K=1");
  const double p1_hat = static_cast<double>(flagged) / static_cast<double>(successes);
  report.p1 = p1_hat;
  report.loss = loss_from_probability(report.a_mass, p1_hat);
  report.shots_used = spec.shots;
  return report;
}

LossEvaluator::LossEvaluator(ProblemInstance instance, EvaluatorSpec spec, std::uint64_t seed)
    : instance_(std::move(instance)), spec_(spec), root_(seed) {}

LossReport LossEvaluator::report(const ParameterVector& params, const EvalTag& tag) const {
  if (spec_.mode != EvaluatorMode::Shots) return loss_circuit(instance_, params, spec_, nullptr);
  CounterStream stream = root_.fork({tag.iteration, static_cast<std::uint64_t>(tag.param),
                                     static_cast<std::uint64_t>(static_cast<std::int64_t>(tag.shift))});
  return loss_circuit(instance_, params, spec_, &stream);
}

void check_shift_angle(double a) {
  const double ratio = a / kHalfPi;
  if (!std::isfinite(a) || std::abs(ratio - std::round(ratio)) < 1e-9) {
    throw Error(ErrorCode::InvalidShiftAngle, "shift angle must not be a multiple of pi/2");
  }
}

GradientReport gradient_gev(const ParameterVector& params, const LossFunction& loss, std::uint64_t iteration) {
  if (params.kind != ProblemKind::GEV) throw Error(ErrorCode::KindMismatch, "gradient_gev needs GEV parameters");
  GradientReport report;
  report.partials.resize(params.size());
  for (Eigen::Index k = 0; k < params.size(); ++k) {
    const double plus = loss(shifted(params, k, kHalfPi), {iteration, k, +1});
    const double minus = loss(shifted(params, k, -kHalfPi), {iteration, k, -1});
    report.partials(k) = two_point_rule(plus, minus);
    report.evaluations += 2;
  }
  return report;
}

GradientReport gradient_ev(const ParameterVector& params, const LossFunction& loss, double shift_angle,
                           std::uint64_t iteration) {
  if (params.kind != ProblemKind::EV) throw Error(ErrorCode::KindMismatch, "gradient_ev needs EV parameters");
  check_shift_angle(shift_angle);
  GradientReport report;
  report.partials.resize(params.size());
  for (Eigen::Index k = 0; k < params.size(); ++k) {
    const double plus = loss(shifted(params, k, kHalfPi), {iteration, k, +1});
    const double minus = loss(shifted(params, k, -kHalfPi), {iteration, k, -1});
    const double plus_a = loss(shifted(params, k, shift_angle), {iteration, k, +2});
    const double minus_a = loss(shifted(params, k, -shift_angle), {iteration, k, -2});
    report.partials(k) = four_point_rule(plus, minus, plus_a, minus_a, shift_angle);
    report.evaluations += 4;
  }
  return report;
}

GradientReport gradient(const ParameterVector& params, const LossFunction& loss, double shift_angle,
                        std::uint64_t iteration) {
  return params.kind == ProblemKind::GEV ? gradient_gev(params, loss, iteration)
                                         : gradient_ev(params, loss, shift_angle, iteration);
}

GradientReport gradient_matrix_exact(const ProblemInstance& instance, const ParameterVector& params,
                                     double shift_angle) {
  GradientReport report;
  if (params.kind == ProblemKind::GEV) {
    const double shifts[] = {kHalfPi, -kHalfPi};
    const Eigen::MatrixXd l = shifted_losses(instance, params, shifts);
    report.partials = 0.5 * (l.col(0) - l.col(1));
    report.evaluations = 2 * params.size();
  } else {
    check_shift_angle(shift_angle);
    const double shifts[] = {kHalfPi, -kHalfPi, shift_angle, -shift_angle};
    const Eigen::MatrixXd l = shifted_losses(instance, params, shifts);
    report.partials.resize(params.size());
    for (Eigen::Index k = 0; k < params.size(); ++k) {
      report.partials(k) = four_point_rule(l(k, 0), l(k, 1), l(k, 2), l(k, 3), shift_angle);
    }
    report.evaluations = 4 * params.size();
  }
  return report;
}

ShotPlan shots_for_accuracy(double a_mass, double p1, double epsilon_l, double success_p, double z) {
  if (!(a_mass > 0.0)) throw Error(ErrorCode::DegenerateMass, "a_mass must be positive");
  if (!(p1 >= 0.0 && p1 < 1.0)) throw Error(ErrorCode::InvalidArgument, "p1 must lie in [0, 1)");
  if (!(epsilon_l > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon_L must be positive");
  if (!(success_p > 0.0 && success_p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "success_p must lie in (0, 1]");
  ShotPlan plan;
  plan.epsilon_p = epsilon_l * (1.0 - p1) * (1.0 - p1) / a_mass;
  // Bernoulli variance, floored so that p1 = 0 still demands enough runs to see it.
  const double variance = std::max(p1 * (1.0 - p1), plan.epsilon_p);
  plan.successful_runs = static_cast<long>(std::ceil(z * z * variance / (plan.epsilon_p * plan.epsilon_p)));
  plan.total_runs = static_cast<long>(std::ceil(static_cast<double>(plan.successful_runs) / success_p));
  plan.reference_runs = 1.0 / plan.epsilon_p;
  return plan;
}

}  // namespace vts
