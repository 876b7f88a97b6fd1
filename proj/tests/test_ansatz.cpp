#include <cmath>
#include <numbers>

#include <unsupported/Eigen/KroneckerProduct>

#include "support.hpp"

using namespace vts;
using Catch::Approx;

namespace {

// Full 2^n x 2^n matrix of a one-qubit gate on `qubit` (qubit 0 is the MSB).
ComplexMatrix embed(const Mat2<double>& g, int n, int qubit) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int q = 0; q < n; ++q) {
    const ComplexMatrix factor = q == qubit ? ComplexMatrix(g) : ComplexMatrix::Identity(2, 2);
    out = Eigen::kroneckerProduct(out, factor).eval();
  }
  return out;
}

ComplexMatrix cnot_matrix(int n, int control, int target) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index x = 0; x < dim; ++x) {
    const bool c = (x >> (n - 1 - control)) & 1;
    const Eigen::Index y = c ? x ^ (Eigen::Index{1} << (n - 1 - target)) : x;
    out(y, x) = 1.0;
  }
  return out;
}

// Straight product of Kronecker-embedded factors, independent of the
// in-place row/column kernels.
ComplexMatrix naive_unitary(int n, int M, const RealVector& angles) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  ComplexMatrix u = ComplexMatrix::Identity(dim, dim);
  for (int block = 0; block < M; ++block) {
    for (int m = 0; m + 1 < n; ++m) u = u * cnot_matrix(n, m, m + 1);
    for (int j = 0; j < n; ++j) {
      u = u * embed(rz(angles(parameter_offset(n, block, j, 0))), n, j);
      u = u * embed(ry(angles(parameter_offset(n, block, j, 1))), n, j);
      u = u * embed(rz(angles(parameter_offset(n, block, j, 2))), n, j);
    }
  }
  return u;
}

}  // namespace

TEST_CASE("parameter counts and offsets", "[ansatz]") {
  CHECK(parameter_count(ProblemKind::GEV, 2, 10) == 120);
  CHECK(parameter_count(ProblemKind::EV, 2, 10) == 60);
  CHECK(parameter_offset(2, 0, 0, 0) == 0);
  CHECK(parameter_offset(2, 0, 1, 2) == 5);
  CHECK(parameter_offset(2, 3, 1, 1) == 22);
  const ParameterVector p = ParameterVector::zeros(ProblemKind::GEV, 2, 3);
  CHECK(p.size() == 36);
  CHECK(p.unitary_size() == 18);
  CHECK(p.values.isZero());
  CHECK_ERROR_CODE(ParameterVector::zeros(ProblemKind::EV, 0, 1), ErrorCode::InvalidArgument);
}

TEST_CASE("elementary rotations", "[ansatz]") {
  const double t = 0.7;
  const Mat2<double> z = rz(t);
  CHECK(std::abs(z(0, 0) - std::polar(1.0, -t / 2)) < 1e-15);
  CHECK(std::abs(z(1, 1) - std::polar(1.0, t / 2)) < 1e-15);
  CHECK(std::abs(z(0, 1)) == 0.0);
  const Mat2<double> y = ry(t);
  CHECK(y(0, 0).real() == Approx(std::cos(t / 2)));
  CHECK(y(0, 1).real() == Approx(-std::sin(t / 2)));
  CHECK(y(1, 0).real() == Approx(std::sin(t / 2)));
  CHECK((ry(std::numbers::pi) * ry(std::numbers::pi) + Mat2<double>::Identity()).norm() < 1e-15);
}

TEST_CASE("ansatz_factors order", "[ansatz]") {
  const auto f = ansatz_factors(2, 2);
  REQUIRE(f.size() == 14);
  CHECK(f[0].kind == FactorKind::Cnot);
  CHECK(f[0].qubit == 0);
  CHECK(f[0].target == 1);
  CHECK(f[1].kind == FactorKind::Rz);
  CHECK(f[1].param == 0);
  CHECK(f[2].kind == FactorKind::Ry);
  CHECK(f[6].param == 5);
  CHECK(f[7].kind == FactorKind::Cnot);
  CHECK(f[8].param == 6);
  CHECK(ansatz_factors(1, 3).size() == 9);
}

TEST_CASE("build_unitary matches the Kronecker product construction", "[ansatz][property]") {
  CounterStream root(51);
  for (int n = 1; n <= 3; ++n) {
    for (int M = 1; M <= 3; ++M) {
      CounterStream s = root.fork({static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(M)});
      const ParameterVector p = test::random_params(s, ProblemKind::EV, n, M);
      const ComplexMatrix u = build_unitary(n, M, p.values);
      CHECK((u - naive_unitary(n, M, p.values)).norm() < 1e-12);
    }
  }
}

TEST_CASE("build_unitary is unitary", "[ansatz][property]") {
  CounterStream root(52);
  for (int trial = 0; trial < 30; ++trial) {
    CounterStream s = root.fork({static_cast<std::uint64_t>(trial)});
    const int n = 1 + trial % 3;
    const int M = 1 + trial % 5;
    const ParameterVector p = test::random_params(s, ProblemKind::EV, n, M, 10.0);
    const ComplexMatrix u = build_unitary(n, M, p.values);
    const Eigen::Index dim = u.rows();
    CHECK((u.adjoint() * u - ComplexMatrix::Identity(dim, dim)).norm() < 1e-12);
  }
}

TEST_CASE("build_unitary works in single precision", "[ansatz]") {
  CounterStream s(53);
  const ParameterVector p = test::random_params(s, ProblemKind::EV, 2, 4);
  const Eigen::VectorXf angles = p.values.cast<float>();
  const CMatrix<float> uf = build_unitary<float>(2, 4, angles);
  const ComplexMatrix ud = build_unitary(2, 4, p.values);
  CHECK((uf.cast<Complex>() - ud).norm() < 1e-5);
}

TEST_CASE("identity angles leave only the CNOT chains", "[ansatz]") {
  const RealVector zero = RealVector::Zero(3);
  CHECK(build_unitary(1, 1, zero).isIdentity());
  const ComplexMatrix u = build_unitary(2, 2, RealVector::Zero(12));
  CHECK((u - cnot_matrix(2, 0, 1) * cnot_matrix(2, 0, 1)).norm() < 1e-15);
  CHECK_ERROR_CODE(build_unitary(2, 2, RealVector::Zero(11)), ErrorCode::BadParameterCount);
}

TEST_CASE("build_unitaries splits the pencil parameters", "[ansatz]") {
  CounterStream s(54);
  const ParameterVector gev = test::random_params(s, ProblemKind::GEV, 2, 3);
  const UnitaryPair g = build_unitaries(gev);
  CHECK((g.row - build_unitary(2, 3, gev.values.head(18))).norm() < 1e-14);
  CHECK((g.col - build_unitary(2, 3, gev.values.tail(18))).norm() < 1e-14);

  const ParameterVector ev = test::random_params(s, ProblemKind::EV, 2, 3);
  const UnitaryPair e = build_unitaries(ev);
  CHECK((e.row - e.col.conjugate()).norm() == 0.0);
  // U_row^T A U_col = U^dagger A U
  const ComplexMatrix a = test::random_matrix(s, 4);
  CHECK((e.row.transpose() * a * e.col - e.col.adjoint() * a * e.col).norm() < 1e-14);

  ParameterVector bad = ev;
  bad.values.conservativeResize(5);
  CHECK_ERROR_CODE(build_unitaries(bad), ErrorCode::BadParameterCount);
}

TEST_CASE("shifted touches one coordinate", "[ansatz]") {
  const ParameterVector p = ParameterVector::zeros(ProblemKind::EV, 1, 2);
  const ParameterVector q = shifted(p, 4, 0.25);
  CHECK(q.values(4) == 0.25);
  CHECK(q.values.sum() == 0.25);
  CHECK(p.values.isZero());
  CHECK_ERROR_CODE(shifted(p, 6, 1.0), ErrorCode::IndexOutOfRange);
  CHECK_ERROR_CODE(shifted(p, -1, 1.0), ErrorCode::IndexOutOfRange);
}

TEST_CASE("quantize rounds to the grid", "[ansatz]") {
  ParameterVector p = ParameterVector::zeros(ProblemKind::EV, 1, 1);
  p.values << 0.123456, -2.5, 2.5;
  const ParameterVector q3 = quantize(p, {3});
  CHECK(q3.values(0) == 0.123);
  CHECK(q3.values(1) == -2.5);
  const ParameterVector q0 = quantize(p, {0});
  CHECK(q0.values(0) == 0.0);
  CHECK(q0.values(1) == -3.0);  // ties away from zero
  CHECK(q0.values(2) == 3.0);
  CHECK(quantize(q3, {3}).values == q3.values);  // idempotent
  CHECK(QuantizationSpec{6}.step() == Approx(1e-6));
  CHECK_ERROR_CODE(quantize(p, {-1}), ErrorCode::InvalidArgument);
}
