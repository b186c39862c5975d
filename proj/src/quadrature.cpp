#include "rfsd/quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

namespace rfsd {

QuadratureValue integrate(const std::function<double(double)>& f, double lo, double hi,
                          const QuadratureConfig& cfg) {
  QuadratureValue out;
  double l1 = 0.0;
  out.value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, lo, hi, cfg.max_depth, cfg.rel_tol, &out.error, &l1);
  return out;
}

QuadratureValue integrate_real_line(const std::function<double(double)>& f, double center,
                                    double half_width, const QuadratureConfig& cfg) {
  QuadratureValue mid = integrate(f, center - half_width, center + half_width, cfg);
  boost::math::quadrature::exp_sinh<double> tail;
  double err_hi = 0.0, err_lo = 0.0;
  const double hi_edge = center + half_width;
  const double lo_edge = center - half_width;
  const double upper =
      tail.integrate([&](double t) { return f(hi_edge + t); }, 0.0,
                     std::numeric_limits<double>::infinity(), cfg.rel_tol, &err_hi);
  const double lower =
      tail.integrate([&](double t) { return f(lo_edge - t); }, 0.0,
                     std::numeric_limits<double>::infinity(), cfg.rel_tol, &err_lo);
  return {mid.value + upper + lower, mid.error + err_hi + err_lo};
}

}  // namespace rfsd
