#include "rfsd/hyper.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "rfsd/kernels.hpp"
#include "rfsd/random.hpp"

namespace rfsd {

double median_distance(const SampleSet& input, int norm_order, std::size_t subsample_size,
                       std::uint64_t seed) {
  require(norm_order == 1 || norm_order == 2, "median_distance: norm order must be 1 or 2");
  require(input.size() >= 2, "median_distance: need at least two points");
  require(subsample_size >= 2, "median_distance: subsample size must be >= 2");
  const SampleSet sample = canonical_order(input);
  const Matrix& pts = sample.points();
  std::vector<Eigen::Index> idx(sample.size());
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  if (idx.size() > subsample_size) {
    Rng rng = make_rng(seed);
    // Partial Fisher-Yates: the first subsample_size slots are a uniform subset.
    for (std::size_t i = 0; i < subsample_size; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(subsample_size);
  }
  std::vector<double> dist;
  dist.reserve(idx.size() * (idx.size() - 1) / 2);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = i + 1; j < idx.size(); ++j) {
      const auto diff = pts.row(idx[i]) - pts.row(idx[j]);
      const double v = norm_order == 1 ? diff.cwiseAbs().sum() : diff.norm();
      if (v > 0.0) dist.push_back(v);
    }
  }
  require(!dist.empty(), "median_distance: all points identical (zero bandwidth)");
  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  const double upper = dist[mid];
  if (dist.size() % 2 == 1) return upper;
  const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

Preset parse_preset(std::string_view name) {
  if (name == "gof") return Preset::gof;
  if (name == "sample-quality" || name == "sample_quality") return Preset::sample_quality;
  if (name == "rbm") return Preset::rbm;
  throw Error("unknown preset '" + std::string(name) + "'");
}

std::string_view preset_name(Preset p) {
  switch (p) {
    case Preset::gof:
      return "gof";
    case Preset::sample_quality:
      return "sample-quality";
    case Preset::rbm:
      return "rbm";
  }
  return "unknown";
}

ConfigOverrides preset_overrides(Preset p) {
  ConfigOverrides o;
  switch (p) {
    case Preset::gof:
      break;
    case Preset::sample_quality:
      o.c = 1.0;
      o.a = 1.0 / std::sqrt(2.0 * std::numbers::pi);
      break;
    case Preset::rbm:
      o.c_median_multiple = 10.0;
      o.df = 2.5;
      break;
  }
  return o;
}

RPhiSDConfig default_config(double gamma, std::size_t dim, Family family, const SampleSet& sample,
                            const ConfigOverrides& ov) {
  require(gamma > 0.0, "default_config: gamma must be positive");
  require(dim >= 1, "default_config: dim must be >= 1");
  require(sample.dim() == dim, "default_config: sample dimension mismatch");
  const double D = static_cast<double>(dim);

  RPhiSDConfig cfg;
  cfg.family = family;
  cfg.gamma = gamma;
  cfg.alpha = gamma / 3.0;
  cfg.lambda_bar = 1.0 - cfg.alpha / 2.0;
  cfg.xi = 4.0 * cfg.alpha / (2.0 + cfg.alpha);
  cfg.M = ov.M;
  cfg.seed = ov.seed;

  switch (family) {
    case Family::l1_imq: {
      double c = 0.0;
      if (ov.c) {
        c = *ov.c;
      } else {
        cfg.kernel.median = median_distance(sample, 2, ov.median_subsample, ov.median_seed);
        c = ov.c_median_multiple * cfg.kernel.median;
      }
      const double beta = ov.beta.value_or(-0.5);
      const double df = ov.df.value_or(0.5);
      require(c > 0.0, "default_config: c must be positive");
      require(beta < 0.0, "default_config: beta must be negative");
      require(df > 0.0, "default_config: df must be positive");
      cfg.kernel.c = c;
      cfg.kernel.beta = beta;
      cfg.kernel.df = df;
      cfg.xi_under = cfg.xi * D / (D + df);
      const double c_prime = cfg.lambda_bar * c / 2.0;
      const double beta_prime = -D / (2.0 * cfg.xi_under);
      cfg.r = ov.r.value_or(-D / (2.0 * beta_prime * cfg.xi_under));
      cfg.feature = FeatureSpec{ImqFeature{c_prime, beta_prime}, TiltFunction::unit()};
      // nu ∝ IMQ(c', beta')^{xi r}, a multivariate t with -2 beta' xi r - D dof.
      const double proposal_df = -2.0 * beta_prime * cfg.xi * cfg.r - D;
      require(proposal_df > 0.0, "default_config: derived proposal has nonpositive dof");
      cfg.proposal = MvtProposal{proposal_df, c_prime};
      break;
    }
    case Family::l2_sechexp: {
      double a = 0.0;
      if (ov.a) {
        a = *ov.a;
      } else {
        cfg.kernel.median = median_distance(sample, 1, ov.median_subsample, ov.median_seed);
        a = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * cfg.kernel.median);
      }
      const double a_prime = ov.a_prime.value_or(1.0);
      require(a > 0.0, "default_config: a must be positive");
      require(a_prime > 0.0, "default_config: a' must be positive");
      cfg.kernel.a = a;
      cfg.kernel.a_prime = a_prime;
      cfg.r = ov.r.value_or(2.0);
      cfg.feature = FeatureSpec{SechFeature{2.0 * a}, TiltFunction::sech_exp(a_prime)};
      cfg.proposal = SechProposal{kSechArgScale * 4.0 * a * cfg.xi};
      break;
    }
    case Family::custom:
      throw Error("default_config: family must be l1-imq or l2-sechexp");
  }
  cfg.validate();
  return cfg;
}

RPhiSDConfig ConfigRecipe::build(const SampleSet& sample) const {
  return default_config(gamma, sample.dim(), family, sample, overrides);
}

RPhiSDConfig ConfigRecipe::build(const SampleSet& sample, std::uint64_t seed) const {
  ConfigOverrides o = overrides;
  o.seed = seed;
  o.median_seed = derive_seed(seed, 0x6d6564);
  return default_config(gamma, sample.dim(), family, sample, o);
}

}  // namespace rfsd
