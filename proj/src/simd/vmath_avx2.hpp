#pragma once

// Vectorized exp/log for four doubles. Cephes-derived rational
// approximations; accurate to a couple of ulp over the ranges the kernels
// use (exp: [-708.39, 709], log: positive normal inputs).

#include <immintrin.h>

namespace rfsd::simd::avx2 {

inline __m256d exp_pd(__m256d x) {
  const __m256d max_arg = _mm256_set1_pd(709.0);
  const __m256d min_arg = _mm256_set1_pd(-708.3964185322641);
  const __m256d underflow = _mm256_cmp_pd(x, min_arg, _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, min_arg), max_arg);

  const __m256d fx =
      _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634073599)),
                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  x = _mm256_fnmadd_pd(fx, _mm256_set1_pd(6.93145751953125e-1), x);
  x = _mm256_fnmadd_pd(fx, _mm256_set1_pd(1.42860682030941723212e-6), x);

  const __m256d xx = _mm256_mul_pd(x, x);
  __m256d px = _mm256_fmadd_pd(_mm256_set1_pd(1.26177193074810590878e-4), xx,
                               _mm256_set1_pd(3.02994407707441961300e-2));
  px = _mm256_fmadd_pd(px, xx, _mm256_set1_pd(9.99999999999999999910e-1));
  px = _mm256_mul_pd(px, x);
  __m256d qx = _mm256_fmadd_pd(_mm256_set1_pd(3.00198505138664455042e-6), xx,
                               _mm256_set1_pd(2.52448340349684104192e-3));
  qx = _mm256_fmadd_pd(qx, xx, _mm256_set1_pd(2.27265548208155028766e-1));
  qx = _mm256_fmadd_pd(qx, xx, _mm256_set1_pd(2.00000000000000000009e0));
  __m256d r = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  r = _mm256_fmadd_pd(r, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

  const __m128i n32 = _mm256_cvtpd_epi32(fx);
  __m256i n64 = _mm256_cvtepi32_epi64(n32);
  n64 = _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
  r = _mm256_mul_pd(r, _mm256_castsi256_pd(n64));
  return _mm256_andnot_pd(underflow, r);
}

inline __m256d log_pd(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i exp_bits = _mm256_srli_epi64(bits, 52);
  const __m256i mant_bits =
      _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
                      _mm256_set1_epi64x(0x3FE0000000000000LL));
  __m256d m = _mm256_castsi256_pd(mant_bits);
  // Small nonnegative int64 -> double through the 2^52 trick.
  const __m256d two52 = _mm256_set1_pd(4503599627370496.0);
  __m256d e = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(exp_bits, _mm256_castpd_si256(two52))), two52);
  e = _mm256_sub_pd(e, _mm256_set1_pd(1022.0));

  const __m256d small = _mm256_cmp_pd(m, _mm256_set1_pd(0.70710678118654752440), _CMP_LT_OQ);
  const __m256d one = _mm256_set1_pd(1.0);
  e = _mm256_sub_pd(e, _mm256_and_pd(small, one));
  const __m256d xs = _mm256_sub_pd(_mm256_add_pd(m, _mm256_and_pd(small, m)), one);

  __m256d p = _mm256_set1_pd(1.01875663804580931796e-4);
  p = _mm256_fmadd_pd(p, xs, _mm256_set1_pd(4.97494994976747001425e-1));
  p = _mm256_fmadd_pd(p, xs, _mm256_set1_pd(4.70579119878881725854e0));
  p = _mm256_fmadd_pd(p, xs, _mm256_set1_pd(1.44989225341610930846e1));
  p = _mm256_fmadd_pd(p, xs, _mm256_set1_pd(1.79368678507819816313e1));
  p = _mm256_fmadd_pd(p, xs, _mm256_set1_pd(7.70838733755885391666e0));
  __m256d q = _mm256_add_pd(xs, _mm256_set1_pd(1.12873587189167450590e1));
  q = _mm256_fmadd_pd(q, xs, _mm256_set1_pd(4.52279145837532221105e1));
  q = _mm256_fmadd_pd(q, xs, _mm256_set1_pd(8.29875266912776603211e1));
  q = _mm256_fmadd_pd(q, xs, _mm256_set1_pd(7.11544750618563894466e1));
  q = _mm256_fmadd_pd(q, xs, _mm256_set1_pd(2.31251620126765340583e1));

  const __m256d z = _mm256_mul_pd(xs, xs);
  __m256d y = _mm256_mul_pd(xs, _mm256_div_pd(_mm256_mul_pd(z, p), q));
  y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(z, _mm256_set1_pd(0.5), y);
  __m256d out = _mm256_add_pd(xs, y);
  return _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), out);
}

inline __m256i tail_mask(std::size_t remaining) {
  const __m256i lanes = _mm256_set_epi64x(3, 2, 1, 0);
  return _mm256_cmpgt_epi64(_mm256_set1_epi64x(static_cast<long long>(remaining)), lanes);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace rfsd::simd::avx2
