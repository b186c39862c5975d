#include <immintrin.h>

#include <numbers>

#include "kernel_impls.hpp"
#include "vmath_avx2.hpp"

namespace rfsd::simd::avx2 {

void imq_stein_features(const FeatureBlock& blk, double c2, double beta) {
  const std::size_t n = blk.n;
  const __m256d vbeta = _mm256_set1_pd(beta);
  const __m256d two_beta = _mm256_set1_pd(2.0 * beta);
  for (std::size_t i = 0; i < n; i += 4) {
    const __m256i mask = tail_mask(n - i);
    __m256d s = _mm256_set1_pd(c2);
    for (std::size_t d = 0; d < blk.dim; ++d) {
      const __m256d diff =
          _mm256_sub_pd(_mm256_maskload_pd(blk.x + d * n + i, mask), _mm256_set1_pd(blk.z[d]));
      s = _mm256_fmadd_pd(diff, diff, s);
    }
    const __m256d lt = _mm256_maskload_pd(blk.log_tilt + i, mask);
    const __m256d w = exp_pd(_mm256_fmadd_pd(vbeta, log_pd(s), lt));
    const __m256d u = _mm256_div_pd(_mm256_mul_pd(w, two_beta), s);
    for (std::size_t d = 0; d < blk.dim; ++d) {
      const __m256d diff =
          _mm256_sub_pd(_mm256_maskload_pd(blk.x + d * n + i, mask), _mm256_set1_pd(blk.z[d]));
      const __m256d drift = _mm256_maskload_pd(blk.drift + d * n + i, mask);
      _mm256_maskstore_pd(blk.out + d * n + i, mask,
                          _mm256_fmadd_pd(w, drift, _mm256_mul_pd(u, diff)));
    }
  }
}

void sech_stein_features(const FeatureBlock& blk, double kappa) {
  const std::size_t n = blk.n;
  const __m256d vkappa = _mm256_set1_pd(kappa);
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d ln2 = _mm256_set1_pd(std::numbers::ln2);
  for (std::size_t i = 0; i < n; i += 4) {
    const __m256i mask = tail_mask(n - i);
    __m256d log_f = _mm256_setzero_pd();
    for (std::size_t d = 0; d < blk.dim; ++d) {
      const __m256d t = _mm256_mul_pd(
          vkappa,
          _mm256_sub_pd(_mm256_maskload_pd(blk.x + d * n + i, mask), _mm256_set1_pd(blk.z[d])));
      const __m256d at = _mm256_andnot_pd(sign, t);
      const __m256d e = exp_pd(_mm256_mul_pd(_mm256_set1_pd(-2.0), at));
      const __m256d one_plus = _mm256_add_pd(one, e);
      log_f = _mm256_add_pd(log_f, _mm256_sub_pd(_mm256_sub_pd(ln2, at), log_pd(one_plus)));
      __m256d th = _mm256_div_pd(_mm256_sub_pd(one, e), one_plus);
      th = _mm256_xor_pd(th, _mm256_and_pd(t, sign));
      const __m256d drift = _mm256_maskload_pd(blk.drift + d * n + i, mask);
      _mm256_maskstore_pd(blk.out + d * n + i, mask, _mm256_fnmadd_pd(vkappa, th, drift));
    }
    const __m256d w =
        exp_pd(_mm256_add_pd(_mm256_maskload_pd(blk.log_tilt + i, mask), log_f));
    for (std::size_t d = 0; d < blk.dim; ++d) {
      double* p = blk.out + d * n + i;
      _mm256_maskstore_pd(p, mask, _mm256_mul_pd(_mm256_maskload_pd(p, mask), w));
    }
  }
}

double imq_ksd_row(const KsdRows& in, std::size_t i, std::size_t j_begin, std::size_t j_end) {
  const std::size_t n = in.n;
  const double beta = in.beta;
  const __m256d c_bb = _mm256_set1_pd(1.0);
  const __m256d c_cross = _mm256_set1_pd(2.0 * beta);
  const __m256d c_trace = _mm256_set1_pd(-2.0 * beta * static_cast<double>(in.dim));
  const __m256d c_r2 = _mm256_set1_pd(-4.0 * beta * (beta - 1.0));
  const __m256d vbeta = _mm256_set1_pd(beta);
  __m256d total = _mm256_setzero_pd();
  for (std::size_t j = j_begin; j < j_end; j += 4) {
    const __m256i mask = tail_mask(j_end - j);
    __m256d r2 = _mm256_setzero_pd();
    __m256d bb = _mm256_setzero_pd();
    __m256d cross = _mm256_setzero_pd();
    for (std::size_t d = 0; d < in.dim; ++d) {
      const __m256d xi = _mm256_set1_pd(in.x[d * n + i]);
      const __m256d bi = _mm256_set1_pd(in.score[d * n + i]);
      const __m256d diff = _mm256_sub_pd(xi, _mm256_maskload_pd(in.x + d * n + j, mask));
      const __m256d bj = _mm256_maskload_pd(in.score + d * n + j, mask);
      r2 = _mm256_fmadd_pd(diff, diff, r2);
      bb = _mm256_fmadd_pd(bi, bj, bb);
      cross = _mm256_fmadd_pd(diff, _mm256_sub_pd(bj, bi), cross);
    }
    const __m256d s = _mm256_add_pd(_mm256_set1_pd(in.c2), r2);
    const __m256d k = exp_pd(_mm256_mul_pd(vbeta, log_pd(s)));
    const __m256d k1 = _mm256_div_pd(k, s);
    const __m256d k2 = _mm256_div_pd(k1, s);
    __m256d k0 = _mm256_mul_pd(_mm256_mul_pd(c_bb, k), bb);
    k0 = _mm256_fmadd_pd(_mm256_mul_pd(c_cross, k1), cross, k0);
    k0 = _mm256_fmadd_pd(c_trace, k1, k0);
    k0 = _mm256_fmadd_pd(_mm256_mul_pd(c_r2, k2), r2, k0);
    total = _mm256_add_pd(total, _mm256_and_pd(k0, _mm256_castsi256_pd(mask)));
  }
  return hsum(total);
}

}  // namespace rfsd::simd::avx2
