#include "vts/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "vts/error.hpp"
#include "vts/random.hpp"

namespace vts {

bool Spectrum::all_finite() const {
  return std::all_of(slots.begin(), slots.end(), [](SlotState s) { return s == SlotState::Finite; });
}

namespace {

void require_square(const ComplexMatrix& m, const char* name) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be a non-empty square matrix");
  }
  if (!m.allFinite()) throw Error(ErrorCode::InvalidArgument, std::string(name) + " has non-finite entries");
}

// Hadamard bound: |det M| <= prod_j ||M(:,j)||.
double hadamard_bound(const ComplexMatrix& m) {
  double bound = 1.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) bound *= m.col(j).norm();
  return bound;
}

}  // namespace

NormalizedPair normalize_pair(const ComplexMatrix& a, const std::optional<ComplexMatrix>& b) {
  require_square(a, "A");
  if (b) {
    require_square(*b, "B");
    if (b->rows() != a.rows()) throw Error(ErrorCode::InvalidArgument, "A and B differ in size");
  }
  const double mass = a.squaredNorm() + (b ? b->squaredNorm() : 0.0);
  if (!(mass > 0.0)) throw Error(ErrorCode::ZeroMatrixPair, "combined Frobenius mass is zero");

  NormalizedPair out;
  out.scale = std::sqrt(mass);
  out.a = a / out.scale;
  if (b) out.b = *b / out.scale;

  const double pivot = std::norm(out.a(0, 0)) + (out.b ? std::norm((*out.b)(0, 0)) : 0.0);
  if (pivot <= kPivotFloor) {
    throw Error(ErrorCode::DegeneratePivot, "|a00|^2 + |b00|^2 = " + std::to_string(pivot));
  }
  return out;
}

ProblemInstance make_instance(ProblemKind kind, const ComplexMatrix& a,
                              const std::optional<ComplexMatrix>& b, std::uint64_t seed) {
  if (kind == ProblemKind::GEV && !b) throw Error(ErrorCode::KindMismatch, "GEV instance needs B");
  if (kind == ProblemKind::EV && b) throw Error(ErrorCode::KindMismatch, "EV instance takes no B");
  if (log2_dim(a.rows()) < 1) {
    throw Error(ErrorCode::InvalidArgument, "dimension must be a power of two >= 2");
  }
  auto normalized = normalize_pair(a, b);
  ProblemInstance inst;
  inst.kind = kind;
  inst.a = std::move(normalized.a);
  inst.b = std::move(normalized.b);
  inst.seed = seed;
  return inst;
}

ComplexMatrix pencil_b(const ProblemInstance& instance) {
  if (instance.b) return *instance.b;
  return ComplexMatrix::Identity(instance.dim(), instance.dim());
}

double instance_mass(const ProblemInstance& instance) {
  return instance.a.squaredNorm() + (instance.b ? instance.b->squaredNorm() : 0.0);
}

ComplexVector pencil_char_poly(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_square(a, "A");
  require_square(b, "B");
  if (a.rows() != b.rows()) throw Error(ErrorCode::InvalidArgument, "A and B differ in size");

  const Eigen::Index n = a.rows();
  const Eigen::Index nodes = n + 1;
  ComplexMatrix vandermonde(nodes, nodes);
  ComplexVector values(nodes);
  double relative_peak = 0.0;
  for (Eigen::Index k = 0; k < nodes; ++k) {
    // Offset the nodes off the real axis so integer-valued spectra do not sit on a node.
    const double angle = 2.0 * std::numbers::pi * (static_cast<double>(k) + 0.25) / static_cast<double>(nodes);
    const Complex z = std::polar(1.0, angle);
    const ComplexMatrix pencil = a - z * b;
    values(k) = pencil.partialPivLu().determinant();
    const double bound = hadamard_bound(pencil);
    if (bound > 0.0) relative_peak = std::max(relative_peak, std::abs(values(k)) / bound);
    Complex power{1.0, 0.0};
    for (Eigen::Index j = 0; j < nodes; ++j) {
      vandermonde(k, j) = power;
      power *= z;
    }
  }
  if (relative_peak < 1e-12) {
    throw Error(ErrorCode::SingularPencil, "det(A - lambda B) vanishes identically");
  }
  return vandermonde.partialPivLu().solve(values);
}

Complex poly_eval(const ComplexVector& c, Complex x) {
  Complex acc{0.0, 0.0};
  for (Eigen::Index i = c.size() - 1; i >= 0; --i) acc = acc * x + c(i);
  return acc;
}

namespace {

// Value, derivative and a running-error bound for |p(x)| from Horner.
struct HornerResult {
  Complex value;
  Complex derivative;
  double error_bound;
};

HornerResult horner(const ComplexVector& c, Complex x) {
  Complex p = c(c.size() - 1);
  Complex dp{0.0, 0.0};
  const double ax = std::abs(x);
  double mu = std::abs(p) / 2.0;
  for (Eigen::Index i = c.size() - 2; i >= 0; --i) {
    dp = dp * x + p;
    p = p * x + c(i);
    mu = mu * ax + std::abs(p);
  }
  const double eps = std::numeric_limits<double>::epsilon();
  return {p, dp, eps * (2.0 * mu - std::abs(p)) * 4.0};
}

}  // namespace

Spectrum poly_roots(const ComplexVector& coefficients) {
  if (coefficients.size() < 2) throw Error(ErrorCode::InvalidArgument, "polynomial degree must be >= 1");
  if (!coefficients.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite coefficients");
  const Eigen::Index degree = coefficients.size() - 1;
  const Complex lead = coefficients(degree);
  const double peak = coefficients.cwiseAbs().maxCoeff();
  if (std::abs(lead) <= 1e-12 * peak) {
    throw Error(ErrorCode::InvalidArgument, "leading coefficient vanishes");
  }
  if (degree == 1) {
    ComplexVector r(1);
    r(0) = -coefficients(0) / lead;
    return Spectrum(r);
  }

  // Start on a circle around the centroid with Fujiwara's radius bound.
  const Complex centroid = -coefficients(degree - 1) / (static_cast<double>(degree) * lead);
  double radius = 0.0;
  for (Eigen::Index i = 0; i < degree; ++i) {
    const double r = std::pow(std::abs(coefficients(i) / lead), 1.0 / static_cast<double>(degree - i));
    radius = std::max(radius, r);
  }
  radius = std::max(radius, 1e-3);
  ComplexVector roots(degree);
  for (Eigen::Index k = 0; k < degree; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(degree) + 0.4;
    roots(k) = centroid + std::polar(radius, angle);
  }

  const double lead_abs = std::abs(lead);
  auto converged = [&](Complex x) {
    const auto h = horner(coefficients, x);
    const double residual = std::abs(h.value);
    return residual / lead_abs < 1e-12 || residual <= h.error_bound;
  };

  constexpr int kMaxSweeps = 500;
  bool done = false;
  for (int sweep = 0; sweep < kMaxSweeps && !done; ++sweep) {
    for (Eigen::Index k = 0; k < degree; ++k) {
      const auto h = horner(coefficients, roots(k));
      if (h.value == Complex{0.0, 0.0}) continue;
      const Complex newton = h.value / h.derivative;
      Complex repulsion{0.0, 0.0};
      for (Eigen::Index j = 0; j < degree; ++j) {
        if (j != k) repulsion += 1.0 / (roots(k) - roots(j));
      }
      const Complex step = newton / (1.0 - newton * repulsion);
      if (std::isfinite(step.real()) && std::isfinite(step.imag())) roots(k) -= step;
    }
    done = true;
    for (Eigen::Index k = 0; k < degree; ++k) done = done && converged(roots(k));
  }
  if (!done) throw Error(ErrorCode::NoConvergence, "root iteration did not reach tolerance");

  // Two Newton polishing steps; kept only when they do not increase the residual.
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index k = 0; k < degree; ++k) {
      const auto h = horner(coefficients, roots(k));
      if (std::abs(h.derivative) == 0.0) continue;
      const Complex candidate = roots(k) - h.value / h.derivative;
      if (std::abs(poly_eval(coefficients, candidate)) <= std::abs(h.value)) roots(k) = candidate;
    }
  }
  return Spectrum(roots);
}

Spectrum oracle_spectrum(const ProblemInstance& instance) {
  const ComplexVector coefficients = pencil_char_poly(instance.a, pencil_b(instance));
  return poly_roots(coefficients);
}

std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != cost.rows()) throw Error(ErrorCode::LengthMismatch, "cost matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();
  // Potentials u (rows), v (columns); p[j] is the row matched to column j (1-based, 0 = free).
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) assignment[p[j] - 1] = j - 1;
  }
  return assignment;
}

double match_error(const Spectrum& computed, const Spectrum& reference) {
  if (computed.size() != reference.size()) {
    throw Error(ErrorCode::LengthMismatch, "spectra differ in length");
  }
  const Eigen::Index n = computed.size();
  if (n == 0) return 0.0;
  if (!computed.all_finite() || !reference.all_finite()) return std::numeric_limits<double>::infinity();
  Eigen::MatrixXd cost(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) cost(i, j) = std::abs(computed.values(i) - reference.values(j));
  }
  const auto assignment = min_cost_assignment(cost);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) total += cost(i, assignment[static_cast<std::size_t>(i)]);
  return total / static_cast<double>(n);
}

ProblemInstance random_instance(std::uint64_t seed, Eigen::Index dim, double min_modulus, ProblemKind kind) {
  if (log2_dim(dim) < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be a power of two >= 2");
  if (!(min_modulus >= 0.0)) throw Error(ErrorCode::InvalidArgument, "min_modulus must be >= 0");

  const CounterStream root(seed);
  auto draw = [dim](CounterStream& stream) {
    ComplexMatrix m(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index j = 0; j < dim; ++j) {
        const double re = stream.uniform(-1.0, 1.0);
        const double im = stream.uniform(-1.0, 1.0);
        m(i, j) = Complex(re, im);
      }
    }
    return m;
  };

  constexpr int kMaxAttempts = 1000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    CounterStream stream = root.fork({static_cast<std::uint64_t>(attempt)});
    const ComplexMatrix a = draw(stream);
    std::optional<ComplexMatrix> b;
    if (kind == ProblemKind::GEV) b = draw(stream);
    try {
      ProblemInstance inst = make_instance(kind, a, b, seed);
      const Spectrum spectrum = oracle_spectrum(inst);
      if (spectrum.values.cwiseAbs().minCoeff() >= min_modulus) return inst;
    } catch (const Error&) {
      // Degenerate draw (pivot, singular pencil, root failure): resample.
    }
  }
  throw Error(ErrorCode::ExhaustedResampling, "no acceptable instance after 1000 attempts");
}

LineFit fit_line(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "x and y differ in length");
  if (x.size() < 2) throw Error(ErrorCode::DegenerateAbscissa, "need at least two points");
  const double mx = x.mean();
  const double my = y.mean();
  const double sxx = (x.array() - mx).square().sum();
  if (!(sxx > 0.0)) throw Error(ErrorCode::DegenerateAbscissa, "all abscissae are equal");
  const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const Eigen::ArrayXd deviation = y.array() - (fit.intercept + fit.slope * x.array());
  fit.residual = std::sqrt(deviation.square().mean());
  return fit;
}

}  // namespace vts
