#include "rfsd/simd/dispatch.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernel_impls.hpp"

namespace rfsd::simd {
namespace {

constexpr KernelTable kScalarTable{&scalar::imq_stein_features, &scalar::sech_stein_features,
                                   &scalar::imq_ksd_row};
#if RFSD_HAVE_AVX2
constexpr KernelTable kAvx2Table{&avx2::imq_stein_features, &avx2::sech_stein_features,
                                 &avx2::imq_ksd_row};
#endif

Level initial_level() {
  Level level = detected_level();
  if (const char* env = std::getenv("RFSD_SIMD"); env != nullptr && std::string(env) == "scalar") {
    level = Level::scalar;
  }
  return level;
}

std::atomic<Level>& active() {
  static std::atomic<Level> level{initial_level()};
  return level;
}

}  // namespace

std::string_view level_name(Level level) {
  switch (level) {
    case Level::scalar:
      return "scalar";
    case Level::avx2:
      return "avx2";
  }
  return "unknown";
}

Level detected_level() {
#if RFSD_HAVE_AVX2
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Level::avx2;
#endif
  return Level::scalar;
}

Level active_level() { return active().load(std::memory_order_relaxed); }

void set_active_level(Level level) {
  if (level == Level::avx2 && detected_level() != Level::avx2) {
    throw std::invalid_argument("AVX2 kernels are not available on this machine");
  }
  active().store(level, std::memory_order_relaxed);
}

const KernelTable& kernels(Level level) {
#if RFSD_HAVE_AVX2
  if (level == Level::avx2) return kAvx2Table;
#endif
  (void)level;
  return kScalarTable;
}

const KernelTable& kernels() { return kernels(active_level()); }

}  // namespace rfsd::simd
