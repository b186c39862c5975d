#pragma once

#include <functional>

namespace rfsd {

struct QuadratureConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;
  unsigned max_depth = 18;
};

struct QuadratureValue {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive Gauss-Kronrod (61 point) on a finite interval.
QuadratureValue integrate(const std::function<double(double)>& f, double lo, double hi,
                          const QuadratureConfig& cfg = {});

// Integral over the real line: adaptive Gauss-Kronrod on [center - half_width,
// center + half_width] plus exp-sinh quadrature on the two tails.
QuadratureValue integrate_real_line(const std::function<double(double)>& f, double center,
                                    double half_width, const QuadratureConfig& cfg = {});

}  // namespace rfsd
