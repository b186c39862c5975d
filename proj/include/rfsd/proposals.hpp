#pragma once

#include <cstdint>
#include <span>
#include <variant>

#include "rfsd/common.hpp"
#include "rfsd/random.hpp"

namespace rfsd {

// Density Gamma((df+D)/2) / (Gamma(df/2) pi^{D/2} c'^D) (1 + |z - m|^2 / c'^2)^{-(df+D)/2}.
struct MvtProposal {
  double df = 0.5;
  double scale = 1.0;
};

// Product over coordinates of (kappa / pi) sech(kappa (u - m_d)).
struct SechProposal {
  double kappa = 1.0;
};

class Proposal {
 public:
  Proposal(std::variant<MvtProposal, SechProposal> kind, Vector center);

  std::size_t dim() const { return static_cast<std::size_t>(center_.size()); }
  const Vector& center() const { return center_; }
  const std::variant<MvtProposal, SechProposal>& kind() const { return kind_; }

  double log_density(std::span<const double> z) const;
  double density(std::span<const double> z) const;
  // m x D matrix of draws.
  Matrix sample(std::size_t m, Rng& rng) const;

 private:
  std::variant<MvtProposal, SechProposal> kind_;
  Vector center_;
  double log_norm_ = 0.0;
};

Proposal mvt_proposal(double df, double c_prime, const Vector& center);
Proposal sech_proposal(double kappa, const Vector& center);

double log_density(const Proposal& p, std::span<const double> z);
Matrix sample(const Proposal& p, std::size_t m, std::uint64_t seed);

// One-dimensional pieces of the product sech proposal.
double sech_proposal_cdf(double kappa, double center, double u);
double sech_proposal_inverse_cdf(double kappa, double center, double v);

}  // namespace rfsd
