#pragma once

#include <cstdint>
#include <deque>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "vts/ansatz.hpp"
#include "vts/loss.hpp"
#include "vts/numerics.hpp"

namespace vts {

enum class StopMode { AccuracyVsOracle, ConvergenceStall };
enum class StopReason { Converged, Stalled, MaxIterations };

const char* to_string(StopReason reason);

struct OptimizerConfig {
  double delta0 = 0.5;
  double growth = 1.0005;
  double improvement_threshold = 0.001;
  int M = 10;
  double shift_angle = std::numbers::pi / 3;  // EV four-point rule
  StopMode stop_mode = StopMode::AccuracyVsOracle;
  double epsilon = 1e-4;           // AccuracyVsOracle target
  double stall_threshold = 1e-12;  // ConvergenceStall: successive-iterate distance
  int stall_warmup = 10;
  /// ConvergenceStall with a deterministic evaluator: also stop when the full
  /// optimizer state (gamma, delta, last two losses) repeats exactly within
  /// this many iterations, since the run is then periodic forever. 0 disables.
  int stall_cycle = 8;
  long max_iterations = 200000;
  std::optional<QuantizationSpec> quantization;
  EvaluatorSpec evaluator;
  std::uint64_t seed = 0;
  /// Literal rule applies both branches when the loss rises (they cancel);
  /// exclusive makes the decrease branch win.
  bool rule_exclusive = false;

  void validate() const;
};

struct TraceRow {
  long iteration = 0;
  double loss = 0.0;
  double delta = 0.0;
  Spectrum eigenvalues;
  double match_error = 0.0;
  double wall_seconds = 0.0;
};

struct OptimizationTrace {
  ProblemKind kind = ProblemKind::GEV;
  std::vector<TraceRow> rows;
  StopReason stop_reason = StopReason::MaxIterations;
  ParameterVector final_params;
  ComplexVector t_diagonal;
  ComplexVector s_diagonal;  // empty for EV
  Spectrum oracle;
  std::uint64_t seed = 0;
  int stall_period = 0;  // Stalled: 1 for no movement, p > 1 for a p-cycle

  long iterations() const { return rows.empty() ? 0 : rows.back().iteration; }
  double final_loss() const { return rows.empty() ? 0.0 : rows.back().loss; }
  double final_match_error() const { return rows.empty() ? 0.0 : rows.back().match_error; }
};

/// Adaptive step: grow when the relative improvement 2(Lp - Lc)/(Lp + Lc)
/// falls below the threshold, then shrink when the loss went up.
double adapt_delta(double loss_prev, double loss_curr, double delta, const OptimizerConfig& config = {});

/// gamma_k <- gamma_k - delta dL/dgamma_k, then quantize when requested.
ParameterVector step(const ParameterVector& params, const RealVector& gradient, double delta,
                     const std::optional<QuantizationSpec>& quantization = std::nullopt);

inline constexpr double kDiagonalFloor = 1e-10;

/// lambda_k = t_kk / s_kk (GEV) or t_kk (EV) from a triangular form.
Spectrum eigenvalues_from_diagonal(const ComplexVector& t_diag, const ComplexVector* s_diag);
Spectrum extract_eigenvalues(const ProblemInstance& instance, const ParameterVector& params);

/// Resumable gradient loop. `advance` continues from the current state, so a
/// sequence of tighter tolerances reproduces one long run (warm start).
class Optimizer {
 public:
  /// Starts from gamma = 0 unless `start` (a checkpoint) is given.
  Optimizer(ProblemInstance instance, OptimizerConfig config, std::optional<ParameterVector> start = std::nullopt);

  /// Iterates until the configured stop rule (with `epsilon` for
  /// AccuracyVsOracle) holds or max_iterations is reached.
  StopReason advance(double epsilon);
  StopReason advance() { return advance(config_.epsilon); }

  const OptimizationTrace& trace() const { return trace_; }
  OptimizationTrace take_trace() { return std::move(trace_); }
  const ParameterVector& params() const { return params_; }
  double delta() const { return delta_; }

 private:
  struct Snapshot {
    double loss;
    Spectrum eigenvalues;
    ComplexVector t_diag;
    ComplexVector s_diag;
  };
  Snapshot evaluate(const ParameterVector& params, std::uint64_t iteration) const;
  GradientReport gradient_at(const ParameterVector& params, std::uint64_t iteration) const;
  bool satisfied(double epsilon) const;
  /// Records the current state; returns p when it equals the state p iterations ago.
  int cycle_period();

  ProblemInstance instance_;
  OptimizerConfig config_;
  LossEvaluator evaluator_;
  ParameterVector params_;
  double delta_;
  double loss_prev_ = 0.0;
  double loss_curr_ = 0.0;
  bool has_prev_ = false;
  Spectrum previous_eigenvalues_;
  struct State {
    RealVector params;
    double delta;
    double loss_prev;
    double loss_curr;
    bool operator==(const State&) const = default;
  };
  std::deque<State> recent_;  // newest last, at most stall_cycle entries
  long iteration_ = 0;
  OptimizationTrace trace_;
};

OptimizationTrace run(const ProblemInstance& instance, const OptimizerConfig& config,
                      std::optional<ParameterVector> start = std::nullopt);

/// CSV: iteration,loss,delta,match_error,lambda_re_0..,lambda_im_0..
std::string trace_csv(const OptimizationTrace& trace);
/// JSON summary: stop_reason, iterations, final_loss, eigenvalues, seed, config echo.
std::string trace_summary_json(const OptimizationTrace& trace, const OptimizerConfig& config);

}  // namespace vts
