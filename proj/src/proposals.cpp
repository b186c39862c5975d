#include "rfsd/proposals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rfsd/kernels.hpp"

namespace rfsd {

Proposal::Proposal(std::variant<MvtProposal, SechProposal> kind, Vector center)
    : kind_(kind), center_(std::move(center)) {
  require(center_.size() >= 1, "proposal: dimension must be >= 1");
  require(center_.allFinite(), "proposal: non-finite center");
  const double dim = static_cast<double>(center_.size());
  if (const auto* t = std::get_if<MvtProposal>(&kind_)) {
    require(t->df > 0.0, "mvt proposal requires df > 0");
    require(t->scale > 0.0, "mvt proposal requires c' > 0");
    log_norm_ = std::lgamma(0.5 * (t->df + dim)) - std::lgamma(0.5 * t->df) -
                0.5 * dim * std::log(std::numbers::pi) - dim * std::log(t->scale);
  } else {
    const double kappa = std::get<SechProposal>(kind_).kappa;
    require(kappa > 0.0, "sech proposal requires kappa > 0");
    log_norm_ = dim * std::log(kappa / std::numbers::pi);
  }
}

double Proposal::log_density(std::span<const double> z) const {
  require(z.size() == dim(), "proposal: dimension mismatch");
  if (const auto* t = std::get_if<MvtProposal>(&kind_)) {
    double r2 = 0.0;
    for (std::size_t d = 0; d < z.size(); ++d) {
      const double u = (z[d] - center_[static_cast<Eigen::Index>(d)]) / t->scale;
      r2 += u * u;
    }
    return log_norm_ - 0.5 * (t->df + static_cast<double>(z.size())) * std::log1p(r2);
  }
  const double kappa = std::get<SechProposal>(kind_).kappa;
  double s = log_norm_;
  for (std::size_t d = 0; d < z.size(); ++d)
    s += log_sech(kappa * (z[d] - center_[static_cast<Eigen::Index>(d)]));
  return s;
}

double Proposal::density(std::span<const double> z) const { return std::exp(log_density(z)); }

Matrix Proposal::sample(std::size_t m, Rng& rng) const {
  require(m >= 1, "proposal: need at least one draw");
  const auto rows = static_cast<Eigen::Index>(m);
  const auto cols = center_.size();
  Matrix out(rows, cols);
  if (const auto* t = std::get_if<MvtProposal>(&kind_)) {
    // The density's (1 + |u|^2/c'^2) form corresponds to c' g / sqrt(chi2_df).
    std::normal_distribution<double> normal;
    std::gamma_distribution<double> chi2(0.5 * t->df, 2.0);
    for (Eigen::Index i = 0; i < rows; ++i) {
      double w = chi2(rng);
      while (w <= 0.0) w = chi2(rng);
      const double s = t->scale / std::sqrt(w);
      for (Eigen::Index d = 0; d < cols; ++d) out(i, d) = center_[d] + s * normal(rng);
    }
  } else {
    const double kappa = std::get<SechProposal>(kind_).kappa;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index d = 0; d < cols; ++d)
        out(i, d) = sech_proposal_inverse_cdf(kappa, center_[d], unif(rng));
  }
  return out;
}

Proposal mvt_proposal(double df, double c_prime, const Vector& center) {
  return Proposal(MvtProposal{df, c_prime}, center);
}

Proposal sech_proposal(double kappa, const Vector& center) {
  return Proposal(SechProposal{kappa}, center);
}

double log_density(const Proposal& p, std::span<const double> z) { return p.log_density(z); }

Matrix sample(const Proposal& p, std::size_t m, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return p.sample(m, rng);
}

double sech_proposal_cdf(double kappa, double center, double u) {
  return 2.0 / std::numbers::pi * std::atan(std::exp(kappa * (u - center)));
}

double sech_proposal_inverse_cdf(double kappa, double center, double v) {
  v = std::clamp(v, 1e-16, 1.0 - 1e-16);
  if (v == 0.5) return center;
  return center + std::log(std::tan(0.5 * std::numbers::pi * v)) / kappa;
}

}  // namespace rfsd
