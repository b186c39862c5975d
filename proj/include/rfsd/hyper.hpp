#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "rfsd/discrepancy.hpp"
#include "rfsd/models.hpp"

namespace rfsd {

struct MedianHeuristic {
  int norm_order = 2;
  std::size_t subsample_size = 1000;
  double value = 0.0;
};

// Median of the nonzero pairwise u-norm distances over a seeded subsample
// (rows are taken in canonical order first). Throws when every distance is 0.
double median_distance(const SampleSet& sample, int norm_order, std::size_t subsample_size = 1000,
                       std::uint64_t seed = 0);

// Values left unset fall back to the per-family defaults.
struct ConfigOverrides {
  std::optional<double> c;             // IMQ base scale; default c_median_multiple * med_2
  double c_median_multiple = 4.0;
  std::optional<double> beta;          // IMQ base exponent; default -1/2
  std::optional<double> df;            // proposal degrees of freedom; default 0.5
  std::optional<double> a;             // sech scale; default 1 / (sqrt(2 pi) med_1)
  std::optional<double> a_prime;       // sech_exp tilt; default 1
  std::optional<double> r;             // replaces the derived r
  std::size_t M = 10;
  std::uint64_t seed = 0;
  std::size_t median_subsample = 1000;
  std::uint64_t median_seed = 0;
};

enum class Preset { gof, sample_quality, rbm };
Preset parse_preset(std::string_view name);
std::string_view preset_name(Preset p);
ConfigOverrides preset_overrides(Preset p);

// alpha = gamma/3, lambda_bar = 1 - alpha/2, xi = 4 alpha / (2 + alpha), then
// the family-specific feature and proposal.
RPhiSDConfig default_config(double gamma, std::size_t dim, Family family, const SampleSet& sample,
                            const ConfigOverrides& overrides = {});

// A family + gamma + overrides that is turned into a config per sample.
struct ConfigRecipe {
  Family family = Family::l1_imq;
  double gamma = 0.25;
  ConfigOverrides overrides{};

  RPhiSDConfig build(const SampleSet& sample) const;
  RPhiSDConfig build(const SampleSet& sample, std::uint64_t seed) const;
};

}  // namespace rfsd
