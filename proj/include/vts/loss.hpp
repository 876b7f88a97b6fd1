#pragma once

#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>

#include "vts/ansatz.hpp"
#include "vts/numerics.hpp"
#include "vts/random.hpp"

namespace vts {

/// Sum of |m_ij|^2 over the strict lower triangle (i > j).
template <typename Derived>
typename Derived::RealScalar strictly_lower_mass(const Eigen::MatrixBase<Derived>& m) {
  typename Derived::RealScalar total(0);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < m.rows(); ++i) total += std::norm(m(i, j));
  }
  return total;
}

enum class EvaluatorMode { MatrixExact, CircuitExact, Shots };

struct EvaluatorSpec {
  EvaluatorMode mode = EvaluatorMode::MatrixExact;
  long shots = 0;

  /// "matrix", "circuit" or "shots:N".
  static EvaluatorSpec parse(const std::string& text);
  std::string str() const;
};

struct LossReport {
  double loss = 0.0;
  double p1 = 0.0;         // P(K=1 | B=1)
  double success_p = 0.0;  // P(B=1)
  double a_mass = 0.0;     // |a~00|^2 + |b~00|^2 = 2^{4n} (|a00|^2 + |b00|^2)
  EvaluatorSpec mode;
  long shots_used = 0;
};

/// T = U_row^T A U_col and S = U_row^T B U_col (S absent for EV).
struct TriangularForm {
  ComplexMatrix t;
  std::optional<ComplexMatrix> s;
};

TriangularForm triangular_form(const ProblemInstance& instance, const ParameterVector& params);

/// The amplified pivot mass 2^{4n} (|a00|^2 + |b00|^2) appearing in the K=0 branch.
double pivot_mass(const ProblemInstance& instance);

/// L = a p1 / (1 - p1).
double loss_from_probability(double a_mass, double p1);

LossReport loss_matrix_exact(const ProblemInstance& instance, const ParameterVector& params);

/// Runs the statevector pipeline. In Shots mode `stream` supplies the draws.
LossReport loss_circuit(const ProblemInstance& instance, const ParameterVector& params,
                        const EvaluatorSpec& spec, CounterStream* stream = nullptr);

/// Identifies one loss evaluation so shot streams can be keyed by
/// (seed, iteration, parameter, shift) regardless of evaluation order.
struct EvalTag {
  std::uint64_t iteration = 0;
  std::int64_t param = -1;
  int shift = 0;  // 0 base, +-1 for +-pi/2, +-2 for +-shift_angle
};

using LossFunction = std::function<double(const ParameterVector&, const EvalTag&)>;

class LossEvaluator {
 public:
  LossEvaluator(ProblemInstance instance, EvaluatorSpec spec, std::uint64_t seed = 0);

  LossReport report(const ParameterVector& params, const EvalTag& tag = {}) const;
  double operator()(const ParameterVector& params, const EvalTag& tag = {}) const {
    return report(params, tag).loss;
  }
  const EvaluatorSpec& spec() const { return spec_; }

 private:
  ProblemInstance instance_;
  EvaluatorSpec spec_;
  CounterStream root_;
};

struct GradientReport {
  RealVector partials;
  long evaluations = 0;
};

inline constexpr double kHalfPi = std::numbers::pi / 2;

/// d/dt of a frequency-1 trigonometric polynomial from L(t +- pi/2).
inline double two_point_rule(double plus, double minus) { return 0.5 * (plus - minus); }

/// d/dt of a frequency-{1,2} trigonometric polynomial from L(t +- pi/2) and L(t +- a).
inline double four_point_rule(double plus, double minus, double plus_a, double minus_a, double a) {
  const double s2 = std::sin(a / 2) * std::sin(a / 2);
  return -(s2 / (2.0 * std::cos(a))) * (2.0 * (plus - minus) - (plus_a - minus_a) / (s2 * std::sin(a)));
}

/// Throws InvalidShiftAngle when a is a multiple of pi/2.
void check_shift_angle(double a);

/// Parameter-shift gradient for the pencil problem (6nM parameters, 12nM calls).
GradientReport gradient_gev(const ParameterVector& params, const LossFunction& loss, std::uint64_t iteration = 0);

/// Four-point gradient for the ordinary problem (3nM parameters, 12nM calls).
GradientReport gradient_ev(const ParameterVector& params, const LossFunction& loss, double shift_angle,
                           std::uint64_t iteration = 0);

/// Dispatch on params.kind.
GradientReport gradient(const ParameterVector& params, const LossFunction& loss, double shift_angle,
                        std::uint64_t iteration = 0);

/// Matrix-exact losses for every parameter shifted by each entry of `shifts`
/// (rows: parameters, columns: shifts). Reuses prefix/suffix products of the
/// ansatz factors so one shifted loss costs O(N^3) instead of O(M n N^2).
Eigen::MatrixXd shifted_losses(const ProblemInstance& instance, const ParameterVector& params,
                               std::span<const double> shifts);

/// Same result as gradient(...) with a matrix-exact evaluator, via shifted_losses.
GradientReport gradient_matrix_exact(const ProblemInstance& instance, const ParameterVector& params,
                                     double shift_angle);

struct ShotPlan {
  double epsilon_p = 0.0;   // required accuracy on p1
  long successful_runs = 0; // post-selected runs, z^2 var / eps_p^2
  long total_runs = 0;      // successful_runs / success probability
  double reference_runs = 0.0;  // the 1/eps_p estimate
};

/// Inverts dL = a eps_p / (1 - p1)^2 for eps_p and sizes a Bernoulli
/// estimate of p1 to that accuracy at z standard deviations.
ShotPlan shots_for_accuracy(double a_mass, double p1, double epsilon_l, double success_p = 1.0, double z = 3.0);

}  // namespace vts
