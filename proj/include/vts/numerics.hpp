#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vts/types.hpp"

namespace vts {

/// Dense pencil (A, B) normalized to unit combined Frobenius mass. For the
/// ordinary eigenvalue problem `b` is absent and B is implicitly the identity
/// for the oracle, but it does not enter the normalization.
struct ProblemInstance {
  ProblemKind kind = ProblemKind::GEV;
  ComplexMatrix a;
  std::optional<ComplexMatrix> b;
  std::uint64_t seed = 0;

  Eigen::Index dim() const { return a.rows(); }
  int qubits() const { return log2_dim(a.rows()); }
};

/// State of one eigenvalue slot. Indeterminate is t_kk = s_kk = 0 (any
/// complex number solves the pencil); Infinite is s_kk = 0 with t_kk != 0.
enum class SlotState { Finite, Indeterminate, Infinite };

struct Spectrum {
  ComplexVector values;
  std::vector<SlotState> slots;

  Spectrum() = default;
  explicit Spectrum(ComplexVector v)
      : values(std::move(v)), slots(static_cast<std::size_t>(values.size()), SlotState::Finite) {}

  Eigen::Index size() const { return values.size(); }
  bool all_finite() const;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root-mean-square deviation
};

struct NormalizedPair {
  ComplexMatrix a;
  std::optional<ComplexMatrix> b;
  double scale = 1.0;
};

inline constexpr double kPivotFloor = 1e-8;

/// Divides A (and B) by sqrt(sum |a_ij|^2 + |b_ij|^2).
NormalizedPair normalize_pair(const ComplexMatrix& a, const std::optional<ComplexMatrix>& b);

/// Builds a validated, normalized instance from raw matrices.
ProblemInstance make_instance(ProblemKind kind, const ComplexMatrix& a,
                              const std::optional<ComplexMatrix>& b, std::uint64_t seed = 0);

/// Coefficients c_0..c_N of det(A - lambda B), recovered by evaluating the
/// determinant at N+1 roots of unity and solving the Vandermonde system.
ComplexVector pencil_char_poly(const ComplexMatrix& a, const ComplexMatrix& b);

/// All roots of sum c_i x^i by Aberth-Ehrlich simultaneous iteration.
Spectrum poly_roots(const ComplexVector& coefficients);

/// Evaluates sum c_i x^i (Horner).
Complex poly_eval(const ComplexVector& coefficients, Complex x);

/// Classical ground truth: roots of det(A - lambda B) (GEV) or det(A - lambda I) (EV).
Spectrum oracle_spectrum(const ProblemInstance& instance);

/// Minimal-cost assignment on a square cost matrix; returns for each row the
/// assigned column (Hungarian algorithm).
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost);

/// (1/N) min over permutations of sum |computed_i - reference_pi(i)|.
/// Returns +inf when either spectrum has a non-finite slot.
double match_error(const Spectrum& computed, const Spectrum& reference);

/// Random pencil with entries uniform on [-1,1] + i[-1,1], resampled until
/// every oracle eigenvalue has modulus >= min_modulus.
ProblemInstance random_instance(std::uint64_t seed, Eigen::Index dim, double min_modulus,
                                ProblemKind kind = ProblemKind::GEV);

/// Ordinary least squares line through (x_i, y_i).
LineFit fit_line(const Eigen::Ref<const Eigen::VectorXd>& x,
                 const Eigen::Ref<const Eigen::VectorXd>& y);

/// Combined squared Frobenius mass of the instance matrices.
double instance_mass(const ProblemInstance& instance);

/// The identity matrix used in place of B for the ordinary problem.
ComplexMatrix pencil_b(const ProblemInstance& instance);

}  // namespace vts
