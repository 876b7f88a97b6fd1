#include <vector>

#include "vts/error.hpp"
#include "vts/loss.hpp"

namespace vts {

namespace {

// Triangle of prod = z * q restricted to i > j (lower) or i < j (upper).
double product_triangle_mass(const ComplexMatrix& z, const ComplexMatrix& q, bool lower) {
  const Eigen::Index dim = z.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const Eigen::Index j_begin = lower ? 0 : i + 1;
    const Eigen::Index j_end = lower ? i : dim;
    for (Eigen::Index j = j_begin; j < j_end; ++j) {
      Complex acc{0.0, 0.0};
      for (Eigen::Index c = 0; c < dim; ++c) acc += z(i, c) * q(c, j);
      total += std::norm(acc);
    }
  }
  return total;
}

// suffix[p] = F_{p+1} ... F_{m-1} for factors in product order.
std::vector<ComplexMatrix> suffix_products(const std::vector<Factor>& factors, const Eigen::Ref<const RealVector>& angles,
                                           int n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  std::vector<ComplexMatrix> suffix(factors.size());
  suffix.back() = ComplexMatrix::Identity(dim, dim);
  for (std::size_t p = factors.size() - 1; p > 0; --p) {
    suffix[p - 1] = suffix[p];
    const Factor& f = factors[p];
    if (f.kind == FactorKind::Cnot) {
      cnot_rows(suffix[p - 1], n, f.qubit, f.target);
    } else {
      apply_rows(suffix[p - 1], rotation<double>(f.kind, angles(f.param)), n, f.qubit);
    }
  }
  return suffix;
}

// Loss contributions of left * U(theta with one angle shifted), for every
// rotation angle and every shift. Results are accumulated into out rows
// offset by `row_offset`.
void one_sided(std::vector<ComplexMatrix> lefts, const Eigen::Ref<const RealVector>& angles, int n, int M,
               std::span<const double> shifts, bool lower, Eigen::Index row_offset, Eigen::MatrixXd& out) {
  const std::vector<Factor> factors = ansatz_factors(n, M);
  const std::vector<ComplexMatrix> suffix = suffix_products(factors, angles, n);
  ComplexMatrix z;
  for (std::size_t p = 0; p < factors.size(); ++p) {
    const Factor& f = factors[p];
    if (f.kind != FactorKind::Cnot) {
      for (std::size_t s = 0; s < shifts.size(); ++s) {
        const auto g = rotation<double>(f.kind, angles(f.param) + shifts[s]);
        double mass = 0.0;
        for (const ComplexMatrix& left : lefts) {
          z = left;
          apply_cols(z, g, n, f.qubit);
          mass += product_triangle_mass(z, suffix[p], lower);
        }
        out(row_offset + f.param, static_cast<Eigen::Index>(s)) += mass;
      }
    }
    for (ComplexMatrix& left : lefts) multiply_factor_right(left, f, angles, n);
  }
}

// EV: U' = P F' Q on both sides of A; T' = Q^dagger (F'^dagger P^dagger A P F') Q.
void two_sided(const ComplexMatrix& a, const Eigen::Ref<const RealVector>& angles, int n, int M,
               std::span<const double> shifts, Eigen::MatrixXd& out) {
  const std::vector<Factor> factors = ansatz_factors(n, M);
  const std::vector<ComplexMatrix> suffix = suffix_products(factors, angles, n);
  ComplexMatrix inner = a;  // P^dagger A P
  ComplexMatrix z;
  ComplexMatrix zq;
  ComplexMatrix q_adjoint;
  for (std::size_t p = 0; p < factors.size(); ++p) {
    const Factor& f = factors[p];
    if (f.kind != FactorKind::Cnot) {
      q_adjoint = suffix[p].adjoint();
      for (std::size_t s = 0; s < shifts.size(); ++s) {
        const auto g = rotation<double>(f.kind, angles(f.param) + shifts[s]);
        const Mat2<double> g_adjoint = g.adjoint();
        z = inner;
        apply_rows(z, g_adjoint, n, f.qubit);
        apply_cols(z, g, n, f.qubit);
        zq.noalias() = z * suffix[p];
        out(f.param, static_cast<Eigen::Index>(s)) = product_triangle_mass(q_adjoint, zq, true);
      }
      const auto g = rotation<double>(f.kind, angles(f.param));
      const Mat2<double> g_adjoint = g.adjoint();
      apply_rows(inner, g_adjoint, n, f.qubit);
      apply_cols(inner, g, n, f.qubit);
    } else {
      cnot_rows(inner, n, f.qubit, f.target);
      cnot_cols(inner, n, f.qubit, f.target);
    }
  }
}

}  // namespace

Eigen::MatrixXd shifted_losses(const ProblemInstance& instance, const ParameterVector& params,
                               std::span<const double> shifts) {
  if (instance.kind != params.kind) throw Error(ErrorCode::KindMismatch, "instance and parameter kinds differ");
  if (instance.qubits() != params.n) throw Error(ErrorCode::LayoutMismatch, "instance size differs from parameter n");
  if (params.size() != parameter_count(params.kind, params.n, params.M)) {
    throw Error(ErrorCode::BadParameterCount, "parameter vector length does not match kind/n/M");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(params.size(), static_cast<Eigen::Index>(shifts.size()));
  const int n = params.n;
  const int M = params.M;

  if (params.kind == ProblemKind::EV) {
    two_sided(instance.a, params.values, n, M, shifts, out);
    return out;
  }

  const UnitaryPair u = build_unitaries(params);
  // alpha side: T^T = (A V)^T U(alpha); lower triangle of T is the upper triangle of T^T.
  std::vector<ComplexMatrix> row_lefts{(instance.a * u.col).transpose()};
  // beta side: T = (U(alpha)^T A) U(beta).
  std::vector<ComplexMatrix> col_lefts{u.row.transpose() * instance.a};
  if (instance.b) {
    row_lefts.push_back(((*instance.b) * u.col).transpose());
    col_lefts.push_back(u.row.transpose() * (*instance.b));
  }
  one_sided(std::move(row_lefts), params.row_side(), n, M, shifts, false, 0, out);
  one_sided(std::move(col_lefts), params.column_side(), n, M, shifts, true, params.unitary_size(), out);
  return out;
}

}  // namespace vts
