#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rfsd/discrepancy.hpp"
#include "rfsd/hyper.hpp"
#include "rfsd/models.hpp"

namespace rfsd {

// Per-point rescaled features xi_{dm}(x_n) with frozen proposal draws.
struct TestFeatures {
  Matrix matrix;  // N x (D*M), column d*M + m
  Matrix z;       // M x D proposal draws
  Vector log_density;
  std::size_t dim = 0;
  std::size_t M = 0;
  double r = 1.0;
};

struct GofTestResult {
  double statistic = 0.0;  // N * RPhiSD^2
  double threshold = 0.0;  // (1 - alpha) quantile of the simulated null
  double p_value = 1.0;
  bool reject = false;
  double alpha_nominal = 0.05;
  std::size_t n_null_sims = 0;
  std::uint64_t seed = 0;
  std::vector<double> null_draws;  // sorted; filled only when requested
};

using SampleGenerator = std::function<SampleSet(std::size_t n, std::uint64_t seed)>;

TestFeatures build_test_features(const SampleSet& sample, const ScoreModel& model,
                                 const RPhiSDConfig& cfg);

// N * sum_d (sum_m |mean_n xi_dm|^r)^{2/r}
double test_statistic(const TestFeatures& tf);

// Plug-in covariance of the feature rows (divides by N).
Matrix estimate_covariance(const TestFeatures& tf);

// Sorted draws of sum_d (sum_m |zeta_dm|^r)^{2/r} with zeta ~ N(0, Sigma).
std::vector<double> simulate_null(const Matrix& sigma, double r, std::size_t dim, std::size_t M,
                                  std::size_t n_sims, std::uint64_t seed);

// (1 - alpha) quantile of sorted draws.
double null_quantile(const std::vector<double>& sorted, double alpha);
// (1 + #{draws >= statistic}) / (n + 1)
double null_p_value(const std::vector<double>& sorted, double statistic);

struct GofOptions {
  double alpha = 0.05;
  std::size_t n_sims = 4000;
  // When set, the covariance is estimated from these points (drawn from P)
  // instead of the tested sample.
  const SampleSet* covariance_sample = nullptr;
  bool keep_null_draws = false;
};

GofTestResult run_test(const SampleSet& sample, const ScoreModel& model, const RPhiSDConfig& cfg,
                       const GofOptions& opts = {});
GofTestResult run_test(const SampleSet& sample, const ScoreModel& model, const RPhiSDConfig& cfg,
                       double alpha, std::size_t n_sims);

struct CalibrationOptions {
  double alpha = 0.05;
  std::size_t n_cal = 200;
  std::size_t n = 1000;
  std::size_t n_sims = 4000;
  std::uint64_t seed = 0;
};

// min(alpha, 5th percentile of n_cal p-values computed on samples from P).
double calibrate_nominal_level(const ScoreModel& model, const SampleGenerator& null_sampler,
                               const ConfigRecipe& recipe, const CalibrationOptions& opts);

struct LabeledRecipe {
  std::string label;
  ConfigRecipe recipe;
};

struct PowerRow {
  std::string label;
  double level = 0.0;  // calibrated nominal level used
  std::size_t rejections = 0;
  std::size_t trials = 0;
  double rate = 0.0;
  double std_error = 0.0;
};

struct PowerOptions {
  std::size_t n = 1000;
  std::size_t trials = 200;
  double alpha = 0.05;
  std::size_t n_sims = 4000;
  std::size_t n_cal = 200;
  bool calibrate = true;
  std::uint64_t seed = 0;
};

// Rejection rate per recipe; the alternative sampler may equal the null one.
std::vector<PowerRow> power_experiment(const ScoreModel& null_model,
                                       const SampleGenerator& null_sampler,
                                       const SampleGenerator& alt_sampler,
                                       const std::vector<LabeledRecipe>& recipes,
                                       const PowerOptions& opts);

}  // namespace rfsd
