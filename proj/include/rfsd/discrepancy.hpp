#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rfsd/common.hpp"
#include "rfsd/features.hpp"
#include "rfsd/models.hpp"
#include "rfsd/proposals.hpp"
#include "rfsd/quadrature.hpp"

namespace rfsd {

enum class Family { l1_imq, l2_sechexp, custom };

Family parse_family(std::string_view name);
std::string_view family_name(Family f);

// Proposal shape; the centre is always the evaluated sample's mean.
using ProposalSpec = std::variant<MvtProposal, SechProposal>;

// Base-kernel parameters the feature and proposal were derived from.
struct KernelParams {
  double c = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  double df = std::numeric_limits<double>::quiet_NaN();
  double a = std::numeric_limits<double>::quiet_NaN();
  double a_prime = std::numeric_limits<double>::quiet_NaN();
  double median = std::numeric_limits<double>::quiet_NaN();  // heuristic value used, if any
};

struct RPhiSDConfig {
  Family family = Family::custom;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double lambda_bar = std::numeric_limits<double>::quiet_NaN();
  double xi = std::numeric_limits<double>::quiet_NaN();
  double xi_under = std::numeric_limits<double>::quiet_NaN();
  double r = 2.0;
  std::size_t M = 10;
  std::uint64_t seed = 0;
  KernelParams kernel{};
  FeatureSpec feature{};
  ProposalSpec proposal = MvtProposal{};

  void validate() const;
  // Feature with its tilt centred at the sample mean.
  FeatureSpec centered_feature(const Vector& mean) const;
  Proposal make_proposal(const Vector& mean) const;
};

struct DiscrepancyResult {
  double value = 0.0;
  Vector per_dim;
  // N x (D*M) of (T_d Phi)(x_n, Z_m) / (M nu(Z_m))^{1/r}; column d*M + m.
  // Rows follow canonical_order(sample).
  std::optional<Matrix> feature_matrix;
  double elapsed_s = 0.0;
  double r = 2.0;
  std::size_t M = 0;
  std::uint64_t seed = 0;
};

// Proposal draws and their exact log densities.
struct ImportanceDraws {
  Matrix z;           // M x D
  Vector log_density;  // M
};

ImportanceDraws draw_proposal(const Proposal& p, std::size_t m, std::uint64_t seed);

// D x M matrix of (Q_N T_d Phi)(Z_m). Parallel over draws.
Matrix applied_features(const FeatureWorkspace& ws, const Matrix& z);

// sum_d ((1/M) sum_m |a_dm|^r / nu(Z_m))^{2/r} split per dimension.
Vector importance_per_dim(const Matrix& applied, const Vector& log_density, double r);

DiscrepancyResult rphisd(const SampleSet& sample, const ScoreModel& model, const RPhiSDConfig& cfg,
                         bool keep_features = false);

struct QuadratureDiscrepancy {
  double value = 0.0;
  Vector per_dim;  // (int |(Q_N T_d Phi)(z)|^r dz)^{2/r}
  double error = 0.0;
};

// Reference PhiSD by adaptive quadrature, D <= 2. The feature tilt is centred
// at the sample mean.
QuadratureDiscrepancy phisd_quadrature(const SampleSet& sample, const ScoreModel& model,
                                       const FeatureSpec& feature, double r,
                                       const QuadratureConfig& quad = {});

struct SecondMoments {
  Vector mean;
  Vector second;
  Vector ratio_gamma;  // E[Y^2] / E[Y]^{2 - gamma}
};

// Y_d = |(Q_N T_d Phi)(Z)|^r / nu(Z) over given draws.
SecondMoments second_moments_from_draws(const FeatureWorkspace& ws, const Matrix& z,
                                        const Vector& log_density, double r, double gamma);

SecondMoments second_moment_diagnostic(const SampleSet& sample, const ScoreModel& model,
                                       const RPhiSDConfig& cfg, std::size_t n_draws);

// Smallest m with m >= 2 c log(dims/delta) / eps^2 * mean^{-gamma}.
std::size_t concentration_sample_size(double c, double gamma, double eps, double delta, double mean,
                                      std::size_t dims = 1);

struct EfficiencyRow {
  std::string label;
  double gamma = 0.0;
  std::size_t M = 0;
  double probability = 0.0;
  std::size_t trials = 0;
  double reference = 0.0;
  std::string reference_kind;
};

struct EfficiencyOptions {
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::size_t reference_M = 1000000;
};

// Pr[RPhiSD > PhiSD / 4] per (config, M). Quadrature reference for D <= 2,
// else a large-M RPhiSD with a fixed seed.
std::vector<EfficiencyRow> efficiency_experiment(const SampleSet& sample, const ScoreModel& model,
                                                 const std::vector<RPhiSDConfig>& cfg_grid,
                                                 const std::vector<std::size_t>& M_grid,
                                                 const EfficiencyOptions& opts);

}  // namespace rfsd
