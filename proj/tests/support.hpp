#pragma once

#include <catch_amalgamated.hpp>

#include "vts/ansatz.hpp"
#include "vts/error.hpp"
#include "vts/numerics.hpp"
#include "vts/random.hpp"

#define CHECK_ERROR_CODE(expr, expected)            \
  do {                                              \
    bool thrown_ = false;                           \
    try {                                           \
      (void)(expr);                                 \
    } catch (const ::vts::Error& e_) {              \
      thrown_ = true;                               \
      CHECK(e_.code() == (expected));               \
    }                                               \
    CHECK(thrown_);                                 \
  } while (false)

namespace vts::test {

inline ComplexMatrix random_matrix(CounterStream& s, Eigen::Index dim) {
  ComplexMatrix m(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) m(i, j) = Complex{s.uniform(-1, 1), s.uniform(-1, 1)};
  }
  return m;
}

inline ParameterVector random_params(CounterStream& s, ProblemKind kind, int n, int M, double scale = 3.14159) {
  ParameterVector p = ParameterVector::zeros(kind, n, M);
  for (Eigen::Index k = 0; k < p.size(); ++k) p.values(k) = s.uniform(-scale, scale);
  return p;
}

}  // namespace vts::test
