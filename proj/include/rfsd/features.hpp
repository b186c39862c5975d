#pragma once

#include <span>
#include <variant>

#include "rfsd/common.hpp"
#include "rfsd/kernels.hpp"
#include "rfsd/models.hpp"

namespace rfsd {

// F(u) = (c^2 + |u|^2)^beta
struct ImqFeature {
  double c = 1.0;
  double beta = -0.5;
};

// F(u) = prod_d sech(sqrt(pi/2) * scale * u_d)
struct SechFeature {
  double scale = 1.0;
};

// Phi(x, z) = A_N(x) F(x - z)
struct FeatureSpec {
  std::variant<ImqFeature, SechFeature> stationary = ImqFeature{};
  TiltFunction tilt{};

  void validate() const;
};

double feature_log_eval(const FeatureSpec& f, std::span<const double> x, std::span<const double> z);
double feature_eval(const FeatureSpec& f, std::span<const double> x, std::span<const double> z);
// d/dx_d log Phi(x, z)
Vector feature_grad_log(const FeatureSpec& f, std::span<const double> x, std::span<const double> z);

// (T_d Phi)(x, z) = b_d(x) Phi(x, z) + d/dx_d Phi(x, z)
Vector stein_feature_eval(const FeatureSpec& f, const ScoreModel& model, std::span<const double> x,
                          std::span<const double> z);

// (Q_N T_d Phi)(z) for every d. Uses f's tilt centre as given.
Vector applied_feature(const SampleSet& sample, const ScoreModel& model, const FeatureSpec& f,
                       std::span<const double> z);

// Sample-side quantities precomputed once so each proposal location costs one
// O(N D) SIMD pass.
class FeatureWorkspace {
 public:
  FeatureWorkspace(const SampleSet& sample, const ScoreModel& model, const FeatureSpec& f);

  std::size_t size() const { return n_; }
  std::size_t dim() const { return dim_; }

  // out (N x D, column-major) receives (T_d Phi)(x_n, z).
  void stein_block(std::span<const double> z, Matrix& out) const;
  // Column means of stein_block, summed in row order.
  void applied(std::span<const double> z, Matrix& scratch, std::span<double> out) const;

 private:
  std::size_t n_;
  std::size_t dim_;
  FeatureSpec feature_;
  Matrix x_;
  Matrix drift_;
  Vector log_tilt_;
};

}  // namespace rfsd
