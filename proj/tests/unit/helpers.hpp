#pragma once

#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "rfsd/common.hpp"
#include "rfsd/random.hpp"

namespace rfsd::test {

inline Vector random_vector(Rng& rng, std::size_t dim, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Vector v(static_cast<Eigen::Index>(dim));
  for (auto& x : v) x = normal(rng);
  return v;
}

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = normal(rng);
  return m;
}

// Central difference of f along coordinate d with step 1e-5 (1 + |x_d|).
inline double central_diff(const std::function<double(const Vector&)>& f, Vector x, Eigen::Index d) {
  const double h = 1e-5 * (1.0 + std::fabs(x[d]));
  const double x0 = x[d];
  x[d] = x0 + h;
  const double fp = f(x);
  x[d] = x0 - h;
  const double fm = f(x);
  return (fp - fm) / (2.0 * h);
}

// |a - b| <= tol * max(|a|, |b|, floor)
inline bool close_rel(double a, double b, double tol, double floor = 1e-8) {
  return std::fabs(a - b) <= tol * std::max({std::fabs(a), std::fabs(b), floor});
}

}  // namespace rfsd::test
