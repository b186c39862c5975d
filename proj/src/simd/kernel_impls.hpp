#pragma once

#include "rfsd/simd/dispatch.hpp"

namespace rfsd::simd {

namespace scalar {
void imq_stein_features(const FeatureBlock& blk, double c2, double beta);
void sech_stein_features(const FeatureBlock& blk, double kappa);
double imq_ksd_row(const KsdRows& in, std::size_t i, std::size_t j_begin, std::size_t j_end);
}  // namespace scalar

#if RFSD_HAVE_AVX2
namespace avx2 {
void imq_stein_features(const FeatureBlock& blk, double c2, double beta);
void sech_stein_features(const FeatureBlock& blk, double kappa);
double imq_ksd_row(const KsdRows& in, std::size_t i, std::size_t j_begin, std::size_t j_end);
}  // namespace avx2
#endif

}  // namespace rfsd::simd
