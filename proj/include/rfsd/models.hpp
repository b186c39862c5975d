#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfsd/common.hpp"

namespace rfsd {

// Target distribution accessed only through its score b(x) = grad log p(x).
struct ScoreModel {
  using ScoreFn = std::function<void(std::span<const double> x, std::span<double> out)>;
  using StochasticScoreFn = std::function<void(
      std::span<const double> x, std::span<const std::size_t> batch, std::span<double> out)>;
  using LogDensityFn = std::function<double(std::span<const double> x)>;

  std::size_t dim = 0;
  std::string label;
  ScoreFn score;
  // Unbiased minibatch estimate of the score; empty when unavailable.
  StochasticScoreFn stochastic_score;
  // Unnormalized log density, when a closed form exists (used by checks).
  LogDensityFn log_density;
  // Number of data points the stochastic score subsamples from.
  std::size_t data_size = 0;

  Vector score_at(std::span<const double> x) const;
  // Scores of every row, N x D column-major.
  Matrix score_matrix(const Matrix& points) const;
};

// Empirical measure Q_N: N points in R^D with cached mean m_N.
class SampleSet {
 public:
  SampleSet() = default;
  explicit SampleSet(Matrix points);

  const Matrix& points() const { return points_; }
  const Vector& mean() const { return mean_; }
  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points_.cols()); }
  Vector row(std::size_t n) const { return points_.row(static_cast<Eigen::Index>(n)).transpose(); }

  static SampleSet concat(const SampleSet& a, const SampleSet& b);

 private:
  Matrix points_;
  Vector mean_;
};

ScoreModel gaussian_model(std::size_t dim);

// Welling & Teh mixture posterior over theta in R^2.
struct GmmHyperparams {
  double sigma1_sq = 10.0;
  double sigma2_sq = 1.0;
  double sigmax_sq = 2.0;
  double weight = 0.5;  // mixture weight of the N(theta1, sigmax^2) component
  std::size_t n_data = 100;
  double theta1_true = 0.0;
  double theta2_true = 1.0;
};

std::vector<double> gmm_generate_data(const GmmHyperparams& hp, std::uint64_t seed);
ScoreModel gmm_posterior_model(std::vector<double> data, const GmmHyperparams& hp = {});

// Gauss-Bernoulli RBM with binary {0,1} hidden units, marginalized:
//   log p(x) = b'x - |x|^2/2 + sum_h softplus((B'x + c)_h) + const.
struct RbmParams {
  Matrix B;  // dx x dh
  Vector b;  // dx
  Vector c;  // dh
};

RbmParams random_rbm(std::size_t dx, std::size_t dh, std::uint64_t seed);
// B + sigma_per * N(0,1) noise, entrywise.
RbmParams perturb_rbm(const RbmParams& p, double sigma_per, std::uint64_t seed);
ScoreModel rbm_model(const RbmParams& p);

double softplus(double t);
double logistic(double t);

enum class AlternativeKind { gaussian, laplace_product, student_t, gmm_sgld_target, rbm_gibbs };

AlternativeKind parse_alternative_kind(std::string_view name);
std::string_view alternative_kind_name(AlternativeKind kind);

struct AlternativeParams {
  std::size_t dim = 1;
  double df = 5.0;  // student_t degrees of freedom
  GmmHyperparams gmm{};
  RbmParams rbm{};
  std::size_t burn_in = 2000;
  std::size_t thin = 50;
};

// i.i.d. draws (a Gibbs chain for rbm_gibbs); deterministic given the seed.
SampleSet sample_alternative(AlternativeKind kind, const AlternativeParams& params, std::size_t n,
                             std::uint64_t seed);

SampleSet rbm_gibbs_sample(const RbmParams& p, std::size_t n, std::size_t burn_in, std::size_t thin,
                           std::uint64_t seed);

}  // namespace rfsd
