#include "kernel_impls.hpp"

#include <cmath>
#include <numbers>

namespace rfsd::simd::scalar {

void imq_stein_features(const FeatureBlock& blk, double c2, double beta) {
  const std::size_t n = blk.n;
  for (std::size_t i = 0; i < n; ++i) {
    double s = c2;
    for (std::size_t d = 0; d < blk.dim; ++d) {
      const double diff = blk.x[d * n + i] - blk.z[d];
      s += diff * diff;
    }
    const double w = std::exp(blk.log_tilt[i] + beta * std::log(s));
    const double u = w * 2.0 * beta / s;
    for (std::size_t d = 0; d < blk.dim; ++d) {
      const double diff = blk.x[d * n + i] - blk.z[d];
      blk.out[d * n + i] = w * blk.drift[d * n + i] + u * diff;
    }
  }
}

void sech_stein_features(const FeatureBlock& blk, double kappa) {
  const std::size_t n = blk.n;
  for (std::size_t i = 0; i < n; ++i) {
    double log_f = 0.0;
    for (std::size_t d = 0; d < blk.dim; ++d) {
      const double t = kappa * (blk.x[d * n + i] - blk.z[d]);
      const double at = std::fabs(t);
      const double e = std::exp(-2.0 * at);
      log_f += std::numbers::ln2 - at - std::log1p(e);
      const double th = std::copysign((1.0 - e) / (1.0 + e), t);
      blk.out[d * n + i] = blk.drift[d * n + i] - kappa * th;
    }
    const double w = std::exp(blk.log_tilt[i] + log_f);
    for (std::size_t d = 0; d < blk.dim; ++d) blk.out[d * n + i] *= w;
  }
}

double imq_ksd_row(const KsdRows& in, std::size_t i, std::size_t j_begin, std::size_t j_end) {
  const std::size_t n = in.n;
  const double beta = in.beta;
  const double dim = static_cast<double>(in.dim);
  double total = 0.0;
  for (std::size_t j = j_begin; j < j_end; ++j) {
    double r2 = 0.0, bb = 0.0, cross = 0.0;
    for (std::size_t d = 0; d < in.dim; ++d) {
      const double diff = in.x[d * n + i] - in.x[d * n + j];
      const double bi = in.score[d * n + i];
      const double bj = in.score[d * n + j];
      r2 += diff * diff;
      bb += bi * bj;
      cross += diff * (bj - bi);
    }
    const double s = in.c2 + r2;
    const double k = std::exp(beta * std::log(s));
    const double k1 = k / s;
    const double k2 = k1 / s;
    total += k * bb + 2.0 * beta * k1 * cross - 2.0 * beta * dim * k1 -
             4.0 * beta * (beta - 1.0) * k2 * r2;
  }
  return total;
}

}  // namespace rfsd::simd::scalar
