#pragma once

#include <cstddef>
#include <string_view>

namespace rfsd::simd {

enum class Level { scalar, avx2 };

std::string_view level_name(Level level);

// Best level the running CPU supports (and this build was compiled for).
Level detected_level();

// Level currently used by the library. Starts at detected_level() unless the
// RFSD_SIMD environment variable names a lower one ("scalar").
Level active_level();
void set_active_level(Level level);

// Inputs for one proposal location z. All N x D blocks are column-major.
struct FeatureBlock {
  std::size_t n = 0;
  std::size_t dim = 0;
  const double* x = nullptr;         // sample points
  const double* drift = nullptr;     // score + grad log tilt at each point
  const double* log_tilt = nullptr;  // log A_N(x_n), length n
  const double* z = nullptr;         // proposal location, length dim
  double* out = nullptr;             // (T_d Phi)(x_n, z), N x D
};

struct KsdRows {
  std::size_t n = 0;
  std::size_t dim = 0;
  const double* x = nullptr;      // N x D
  const double* score = nullptr;  // N x D
  double c2 = 1.0;
  double beta = -0.5;
};

struct KernelTable {
  // Stein features for F(u) = (c2 + |u|^2)^beta.
  void (*imq_stein_features)(const FeatureBlock&, double c2, double beta);
  // Stein features for F(u) = prod_d sech(kappa * u_d).
  void (*sech_stein_features)(const FeatureBlock&, double kappa);
  // Sum over j in [j_begin, j_end) of the IMQ Stein kernel k0(x_i, x_j).
  double (*imq_ksd_row)(const KsdRows&, std::size_t i, std::size_t j_begin, std::size_t j_end);
};

const KernelTable& kernels();
const KernelTable& kernels(Level level);

}  // namespace rfsd::simd
