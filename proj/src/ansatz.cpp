#include "vts/ansatz.hpp"

#include <string>

namespace vts {

Eigen::Index parameter_count(ProblemKind kind, int n, int M) {
  const Eigen::Index per_unitary = 3 * Eigen::Index{n} * M;
  return kind == ProblemKind::GEV ? 2 * per_unitary : per_unitary;
}

ParameterVector ParameterVector::zeros(ProblemKind kind, int n, int M) {
  if (n < 1 || M < 1) throw Error(ErrorCode::InvalidArgument, "n and M must be >= 1");
  ParameterVector p;
  p.kind = kind;
  p.n = n;
  p.M = M;
  p.values = RealVector::Zero(parameter_count(kind, n, M));
  return p;
}

ParameterVector shifted(const ParameterVector& params, Eigen::Index k, double amount) {
  if (k < 0 || k >= params.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "parameter index " + std::to_string(k));
  }
  ParameterVector out = params;
  out.values(k) += amount;
  return out;
}

ParameterVector quantize(const ParameterVector& params, const QuantizationSpec& spec) {
  if (spec.digits < 0) throw Error(ErrorCode::InvalidArgument, "quantization digits must be >= 0");
  // Scale by the exact integer 10^d rather than dividing by 10^-d, which is inexact.
  const double scale = std::pow(10.0, spec.digits);
  ParameterVector out = params;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out.values(i) = std::round(out.values(i) * scale) / scale;
  }
  return out;
}

std::vector<Factor> ansatz_factors(int n, int M) {
  std::vector<Factor> factors;
  factors.reserve(static_cast<std::size_t>(M) * (3 * n + n - 1));
  for (int block = 0; block < M; ++block) {
    for (int m = 0; m + 1 < n; ++m) factors.push_back({FactorKind::Cnot, m, m + 1, -1});
    for (int j = 0; j < n; ++j) {
      factors.push_back({FactorKind::Rz, j, -1, parameter_offset(n, block, j, 0)});
      factors.push_back({FactorKind::Ry, j, -1, parameter_offset(n, block, j, 1)});
      factors.push_back({FactorKind::Rz, j, -1, parameter_offset(n, block, j, 2)});
    }
  }
  return factors;
}

UnitaryPair build_unitaries(const ParameterVector& params) {
  if (params.size() != parameter_count(params.kind, params.n, params.M)) {
    throw Error(ErrorCode::BadParameterCount, "parameter vector length does not match kind/n/M");
  }
  UnitaryPair pair;
  if (params.kind == ProblemKind::GEV) {
    pair.row = build_unitary(params.n, params.M, params.row_side());
    pair.col = build_unitary(params.n, params.M, params.column_side());
  } else {
    pair.col = build_unitary(params.n, params.M, params.values);
    pair.row = pair.col.conjugate();
  }
  return pair;
}

}  // namespace vts
