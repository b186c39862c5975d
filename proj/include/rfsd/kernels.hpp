#pragma once

#include <span>
#include <variant>

#include "rfsd/common.hpp"
#include "rfsd/models.hpp"

namespace rfsd {

// Positive weight A_N(x) = A(x - center). The unit tilt is identically 1;
// sech_exp is prod_d exp(a' * sqrt(1 + (x_d - center_d)^2)).
struct TiltFunction {
  enum class Kind { unit, sech_exp };
  Kind kind = Kind::unit;
  double a_prime = 1.0;
  Vector center;  // empty means the origin

  static TiltFunction unit() { return {}; }
  static TiltFunction sech_exp(double a_prime) { return {Kind::sech_exp, a_prime, {}}; }

  TiltFunction centered_at(const Vector& c) const;
  double log_eval(std::span<const double> x) const;
  // d/dx_d log A_N(x), written into out.
  void grad_log(std::span<const double> x, std::span<double> out) const;
};

// (c^2 + |u|^2)^beta
struct ImqKernel {
  double c = 1.0;
  double beta = -0.5;
};

// prod_d sech(sqrt(pi/2) * a * u_d)
struct SechKernel {
  double a = 1.0;
};

using StationaryKernel = std::variant<ImqKernel, SechKernel>;

// k(x, y) = A_N(x) F(x - y) A_N(y)
struct BaseKernel {
  StationaryKernel stationary = ImqKernel{};
  TiltFunction tilt{};

  static BaseKernel imq(double c, double beta) { return {ImqKernel{c, beta}, {}}; }
  static BaseKernel sech(double a) { return {SechKernel{a}, {}}; }
  static BaseKernel tilted(StationaryKernel s, TiltFunction t) { return {s, std::move(t)}; }

  void validate() const;
};

// sech(u) without overflow: 2 e^{-|u|} / (1 + e^{-2|u|}).
double sech(double u);
double log_sech(double u);

inline constexpr double kSechArgScale = 1.2533141373155002512;  // sqrt(pi/2)

double kernel_eval(const BaseKernel& k, std::span<const double> x, std::span<const double> y);
Vector kernel_grad_x(const BaseKernel& k, std::span<const double> x, std::span<const double> y);
Vector kernel_grad_y(const BaseKernel& k, std::span<const double> x, std::span<const double> y);
Vector kernel_dxdy_diag(const BaseKernel& k, std::span<const double> x, std::span<const double> y);

// sum_d [bx_d by_d k + bx_d dk/dy_d + by_d dk/dx_d + d2k/dx_d dy_d]
double stein_kernel_from_partials(std::span<const double> bx, std::span<const double> by, double k,
                                  std::span<const double> grad_x, std::span<const double> grad_y,
                                  std::span<const double> dxdy_diag);

double stein_kernel_eval(const ScoreModel& model, const BaseKernel& k, std::span<const double> x,
                         std::span<const double> y);

// V-statistic KSD^2 = N^-2 sum_{n,n'} k0(x_n, x_n'). The tilt is re-centred at
// the sample mean. Untilted IMQ kernels take the SIMD path.
double ksd_squared(const SampleSet& sample, const ScoreModel& model, const BaseKernel& k);

// Rows sorted lexicographically. Estimators evaluate on this order so that
// results do not depend on how the caller ordered the sample.
SampleSet canonical_order(const SampleSet& sample);

}  // namespace rfsd
