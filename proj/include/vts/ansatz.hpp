#pragma once

#include <cmath>
#include <vector>

#include "vts/error.hpp"
#include "vts/types.hpp"

namespace vts {

/// Real optimization parameters. Layout is block-major, then qubit-major,
/// then the (Rz, Ry, Rz) triple of one rotation r_j. For GEV the alpha half
/// (3nM values, acting as U^T on the row side) precedes the beta half.
struct ParameterVector {
  ProblemKind kind = ProblemKind::GEV;
  int n = 1;
  int M = 1;
  RealVector values;

  static ParameterVector zeros(ProblemKind kind, int n, int M);

  Eigen::Index size() const { return values.size(); }
  Eigen::Index unitary_size() const { return 3 * Eigen::Index{n} * M; }

  /// Parameters of the row-side unitary U(alpha) (GEV) or U(beta) (EV).
  Eigen::Ref<const RealVector> row_side() const { return values.head(unitary_size()); }
  /// Parameters of the column-side unitary U(beta).
  Eigen::Ref<const RealVector> column_side() const { return values.tail(unitary_size()); }
};

Eigen::Index parameter_count(ProblemKind kind, int n, int M);

/// Offset of rotation angle `axis` (0: first Rz, 1: Ry, 2: second Rz) of
/// qubit `qubit` (0-based, 0 = most significant) in block `block`.
inline Eigen::Index parameter_offset(int n, int block, int qubit, int axis) {
  return 3 * (Eigen::Index{n} * block + qubit) + axis;
}

struct QuantizationSpec {
  int digits = 0;
  double step() const { return std::pow(10.0, -digits); }
};

ParameterVector shifted(const ParameterVector& params, Eigen::Index k, double amount);

/// Rounds every value to the nearest multiple of 10^-d, ties away from zero.
ParameterVector quantize(const ParameterVector& params, const QuantizationSpec& spec);

// ---------------------------------------------------------------------------
// Elementary factors of U(theta) = prod_k [ (prod_m C_{m,m+1}) (prod_j r_j) ]

enum class FactorKind { Rz, Ry, Cnot };

/// One factor in matrix-product order. Rotations act on `qubit` with angle
/// index `param`; CNOT uses `qubit` as control and `target`.
struct Factor {
  FactorKind kind;
  int qubit;
  int target = -1;
  Eigen::Index param = -1;
};

/// Factors of U for n qubits and M blocks, leftmost first.
std::vector<Factor> ansatz_factors(int n, int M);

template <typename Scalar>
using Mat2 = Eigen::Matrix<std::complex<Scalar>, 2, 2>;

template <typename Scalar>
Mat2<Scalar> rz(Scalar theta) {
  using C = std::complex<Scalar>;
  Mat2<Scalar> m;
  m << std::polar(Scalar(1), -theta / 2), C(0), C(0), std::polar(Scalar(1), theta / 2);
  return m;
}

template <typename Scalar>
Mat2<Scalar> ry(Scalar theta) {
  const Scalar c = std::cos(theta / 2);
  const Scalar s = std::sin(theta / 2);
  Mat2<Scalar> m;
  m << c, -s, s, c;
  return m;
}

template <typename Scalar>
Mat2<Scalar> rotation(FactorKind kind, Scalar theta) {
  return kind == FactorKind::Rz ? rz(theta) : ry(theta);
}

/// Bit position of register qubit `qubit` (0 = most significant) in an
/// n-qubit index.
inline int bit_of(int n, int qubit) { return n - 1 - qubit; }

/// m <- (g acting on `qubit`) * m
template <typename Derived, typename Scalar>
void apply_rows(Eigen::MatrixBase<Derived>& m, const Mat2<Scalar>& g, int n, int qubit) {
  const Eigen::Index stride = Eigen::Index{1} << bit_of(n, qubit);
  for (Eigen::Index r0 = 0; r0 < m.rows(); ++r0) {
    if (r0 & stride) continue;
    const Eigen::Index r1 = r0 | stride;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const auto x0 = m(r0, c);
      const auto x1 = m(r1, c);
      m(r0, c) = g(0, 0) * x0 + g(0, 1) * x1;
      m(r1, c) = g(1, 0) * x0 + g(1, 1) * x1;
    }
  }
}

/// m <- m * (g acting on `qubit`)
template <typename Derived, typename Scalar>
void apply_cols(Eigen::MatrixBase<Derived>& m, const Mat2<Scalar>& g, int n, int qubit) {
  const Eigen::Index stride = Eigen::Index{1} << bit_of(n, qubit);
  for (Eigen::Index c0 = 0; c0 < m.cols(); ++c0) {
    if (c0 & stride) continue;
    const Eigen::Index c1 = c0 | stride;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const auto x0 = m(r, c0);
      const auto x1 = m(r, c1);
      m(r, c0) = x0 * g(0, 0) + x1 * g(1, 0);
      m(r, c1) = x0 * g(0, 1) + x1 * g(1, 1);
    }
  }
}

/// m <- CNOT * m (row permutation; CNOT is an involution).
template <typename Derived>
void cnot_rows(Eigen::MatrixBase<Derived>& m, int n, int control, int target) {
  const Eigen::Index cbit = Eigen::Index{1} << bit_of(n, control);
  const Eigen::Index tbit = Eigen::Index{1} << bit_of(n, target);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if ((r & cbit) && !(r & tbit)) m.row(r).swap(m.row(r | tbit));
  }
}

/// m <- m * CNOT (column permutation).
template <typename Derived>
void cnot_cols(Eigen::MatrixBase<Derived>& m, int n, int control, int target) {
  const Eigen::Index cbit = Eigen::Index{1} << bit_of(n, control);
  const Eigen::Index tbit = Eigen::Index{1} << bit_of(n, target);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if ((c & cbit) && !(c & tbit)) m.col(c).swap(m.col(c | tbit));
  }
}

/// m <- m * F for one ansatz factor with the given angles.
template <typename Derived, typename AngleVector>
void multiply_factor_right(Eigen::MatrixBase<Derived>& m, const Factor& f, const AngleVector& angles, int n) {
  using Scalar = typename Derived::RealScalar;
  if (f.kind == FactorKind::Cnot) {
    cnot_cols(m, n, f.qubit, f.target);
  } else {
    apply_cols(m, rotation<Scalar>(f.kind, static_cast<Scalar>(angles(f.param))), n, f.qubit);
  }
}

/// U(theta) for n qubits and M blocks from 3nM angles.
template <typename Scalar = double, typename AngleVector>
CMatrix<Scalar> build_unitary(int n, int M, const AngleVector& angles) {
  if (n < 1 || M < 1) throw Error(ErrorCode::InvalidArgument, "n and M must be >= 1");
  if (static_cast<Eigen::Index>(angles.size()) != 3 * Eigen::Index{n} * M) {
    throw Error(ErrorCode::BadParameterCount, "expected 3nM angles");
  }
  const Eigen::Index dim = Eigen::Index{1} << n;
  CMatrix<Scalar> u = CMatrix<Scalar>::Identity(dim, dim);
  for (const Factor& f : ansatz_factors(n, M)) multiply_factor_right(u, f, angles, n);
  return u;
}

/// Row-side and column-side unitaries of the current parameters. For EV the
/// row side is U*(beta), so that U_row^T A U_col = U^dagger A U.
struct UnitaryPair {
  ComplexMatrix row;
  ComplexMatrix col;
};

UnitaryPair build_unitaries(const ParameterVector& params);

}  // namespace vts
