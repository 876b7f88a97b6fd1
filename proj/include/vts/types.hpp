#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace vts {

template <typename Scalar>
using CMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using CVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using ComplexMatrix = CMatrix<double>;
using ComplexVector = CVector<double>;
using RealVector = Eigen::VectorXd;

enum class ProblemKind { GEV, EV };

inline const char* to_string(ProblemKind kind) {
  return kind == ProblemKind::GEV ? "gev" : "ev";
}

/// Number of index qubits n for a matrix dimension N = 2^n. Returns -1 when N
/// is not a power of two or N < 2.
inline int log2_dim(Eigen::Index dim) {
  if (dim < 2 || (dim & (dim - 1)) != 0) return -1;
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  return n;
}

}  // namespace vts
