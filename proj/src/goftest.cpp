#include "rfsd/goftest.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "rfsd/parallel.hpp"
#include "rfsd/random.hpp"

namespace rfsd {

TestFeatures build_test_features(const SampleSet& sample, const ScoreModel& model,
                                 const RPhiSDConfig& cfg) {
  DiscrepancyResult res = rphisd(sample, model, cfg, /*keep_features=*/true);
  const SampleSet ordered = canonical_order(sample);
  const Proposal proposal = cfg.make_proposal(ordered.mean());
  ImportanceDraws draws = draw_proposal(proposal, cfg.M, cfg.seed);
  TestFeatures tf;
  tf.matrix = std::move(*res.feature_matrix);
  tf.z = std::move(draws.z);
  tf.log_density = std::move(draws.log_density);
  tf.dim = sample.dim();
  tf.M = cfg.M;
  tf.r = cfg.r;
  return tf;
}

double test_statistic(const TestFeatures& tf) {
  const Eigen::Index n = tf.matrix.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t d = 0; d < tf.dim; ++d) {
    double inner = 0.0;
    for (std::size_t m = 0; m < tf.M; ++m) {
      const double* col = tf.matrix.col(static_cast<Eigen::Index>(d * tf.M + m)).data();
      double s = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) s += col[i];
      const double mean = std::fabs(s * inv_n);
      inner += mean == 0.0 ? 0.0 : std::pow(mean, tf.r);
    }
    total += std::pow(inner, 2.0 / tf.r);
  }
  return static_cast<double>(n) * total;
}

Matrix estimate_covariance(const TestFeatures& tf) {
  const Eigen::Index n = tf.matrix.rows();
  require(n >= 2, "estimate_covariance: need at least two points");
  const Eigen::RowVectorXd mean = tf.matrix.colwise().mean();
  const Matrix centered = tf.matrix.rowwise() - mean;
  const Eigen::Index k = tf.matrix.cols();
  Matrix sigma = Matrix::Zero(k, k);
  sigma.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / static_cast<double>(n));
  sigma.triangularView<Eigen::StrictlyUpper>() = sigma.transpose();
  return sigma;
}

std::vector<double> simulate_null(const Matrix& sigma, double r, std::size_t dim, std::size_t M,
                                  std::size_t n_sims, std::uint64_t seed) {
  const auto k = static_cast<Eigen::Index>(dim * M);
  require(sigma.rows() == k && sigma.cols() == k, "simulate_null: covariance must be DM x DM");
  require(sigma.allFinite(), "simulate_null: non-finite covariance");
  require(n_sims >= 100, "simulate_null: need at least 100 simulations");
  std::vector<double> draws(n_sims, 0.0);
  const double trace = sigma.trace();
  if (trace == 0.0) return draws;

  Matrix chol;
  const double base = 1e-10 * trace / static_cast<double>(k);
  bool ok = false;
  for (double jitter = base; jitter <= 1e-6 * trace / static_cast<double>(k) * 1.0000001;
       jitter *= 10.0) {
    Eigen::LLT<Matrix> llt(sigma + jitter * Matrix::Identity(k, k));
    if (llt.info() == Eigen::Success) {
      chol = llt.matrixL();
      ok = true;
      break;
    }
  }
  require(ok, "simulate_null: covariance factorization failed after jitter retries");

  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (n_sims + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng = make_rng(seed, c);
    std::normal_distribution<double> normal;
    Vector g(k), zeta(k);
    const std::size_t end = std::min(n_sims, (c + 1) * kChunk);
    for (std::size_t s = c * kChunk; s < end; ++s) {
      for (auto& v : g) v = normal(rng);
      zeta.noalias() = chol.triangularView<Eigen::Lower>() * g;
      double total = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        double inner = 0.0;
        for (std::size_t m = 0; m < M; ++m) {
          const double a = std::fabs(zeta[static_cast<Eigen::Index>(d * M + m)]);
          inner += r == 2.0 ? a * a : (r == 1.0 ? a : std::pow(a, r));
        }
        total += r == 2.0 ? inner : (r == 1.0 ? inner * inner : std::pow(inner, 2.0 / r));
      }
      draws[s] = total;
    }
  });
  std::sort(draws.begin(), draws.end());
  return draws;
}

double null_quantile(const std::vector<double>& sorted, double alpha) {
  require(!sorted.empty(), "null_quantile: no draws");
  const double pos = std::ceil((1.0 - alpha) * static_cast<double>(sorted.size()));
  const auto idx = static_cast<std::size_t>(std::clamp(pos, 1.0, static_cast<double>(sorted.size())));
  return sorted[idx - 1];
}

double null_p_value(const std::vector<double>& sorted, double statistic) {
  const auto first_ge = std::lower_bound(sorted.begin(), sorted.end(), statistic);
  const auto count = static_cast<double>(std::distance(first_ge, sorted.end()));
  return (1.0 + count) / (static_cast<double>(sorted.size()) + 1.0);
}

GofTestResult run_test(const SampleSet& sample, const ScoreModel& model, const RPhiSDConfig& cfg,
                       const GofOptions& opts) {
  require(opts.alpha > 0.0 && opts.alpha < 1.0, "run_test: alpha must lie in (0, 1)");
  const TestFeatures tf = build_test_features(sample, model, cfg);
  Matrix sigma;
  if (opts.covariance_sample != nullptr) {
    // Same frozen draws, evaluated on the P sample.
    const SampleSet ordered = canonical_order(*opts.covariance_sample);
    const FeatureWorkspace ws(ordered, model, cfg.centered_feature(canonical_order(sample).mean()));
    TestFeatures other = tf;
    other.matrix.resize(static_cast<Eigen::Index>(ordered.size()), tf.matrix.cols());
    Matrix block;
    for (std::size_t m = 0; m < tf.M; ++m) {
      const Vector zm = tf.z.row(static_cast<Eigen::Index>(m)).transpose();
      ws.stein_block(as_span(zm), block);
      const double scale = std::exp(-(std::log(static_cast<double>(tf.M)) +
                                      tf.log_density[static_cast<Eigen::Index>(m)]) /
                                    tf.r);
      for (std::size_t d = 0; d < tf.dim; ++d)
        other.matrix.col(static_cast<Eigen::Index>(d * tf.M + m)) =
            block.col(static_cast<Eigen::Index>(d)) * scale;
    }
    sigma = estimate_covariance(other);
  } else {
    sigma = estimate_covariance(tf);
  }
  GofTestResult res;
  res.statistic = test_statistic(tf);
  res.seed = cfg.seed;
  res.alpha_nominal = opts.alpha;
  res.n_null_sims = opts.n_sims;
  std::vector<double> null = simulate_null(sigma, cfg.r, tf.dim, tf.M, opts.n_sims,
                                           derive_seed(cfg.seed, 0x6e756c6c));
  res.threshold = null_quantile(null, opts.alpha);
  res.p_value = null_p_value(null, res.statistic);
  res.reject = res.statistic > res.threshold;
  if (opts.keep_null_draws) res.null_draws = std::move(null);
  return res;
}

GofTestResult run_test(const SampleSet& sample, const ScoreModel& model, const RPhiSDConfig& cfg,
                       double alpha, std::size_t n_sims) {
  GofOptions opts;
  opts.alpha = alpha;
  opts.n_sims = n_sims;
  return run_test(sample, model, cfg, opts);
}

namespace {

// Linear-interpolation empirical quantile.
double empirical_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace

double calibrate_nominal_level(const ScoreModel& model, const SampleGenerator& null_sampler,
                               const ConfigRecipe& recipe, const CalibrationOptions& opts) {
  require(opts.n_cal >= 20, "calibrate_nominal_level: need at least 20 calibration draws");
  require(opts.alpha > 0.0 && opts.alpha < 1.0, "calibrate_nominal_level: alpha must lie in (0, 1)");
  std::vector<double> p(opts.n_cal, 1.0);
  parallel_for(opts.n_cal, [&](std::size_t i) {
    const std::uint64_t trial_seed = derive_seed(opts.seed, i);
    const SampleSet s = null_sampler(opts.n, derive_seed(trial_seed, 1));
    const RPhiSDConfig cfg = recipe.build(s, derive_seed(trial_seed, 2));
    p[i] = run_test(s, model, cfg, opts.alpha, opts.n_sims).p_value;
  });
  return std::min(opts.alpha, empirical_quantile(std::move(p), 0.05));
}

std::vector<PowerRow> power_experiment(const ScoreModel& null_model,
                                       const SampleGenerator& null_sampler,
                                       const SampleGenerator& alt_sampler,
                                       const std::vector<LabeledRecipe>& recipes,
                                       const PowerOptions& opts) {
  require(opts.trials >= 50, "power_experiment: need at least 50 trials");
  std::vector<PowerRow> rows;
  for (std::size_t k = 0; k < recipes.size(); ++k) {
    const LabeledRecipe& lr = recipes[k];
    const std::uint64_t recipe_seed = derive_seed(opts.seed, k);
    double level = opts.alpha;
    if (opts.calibrate) {
      CalibrationOptions cal;
      cal.alpha = opts.alpha;
      cal.n_cal = opts.n_cal;
      cal.n = opts.n;
      cal.n_sims = opts.n_sims;
      cal.seed = derive_seed(recipe_seed, 0xca1);
      level = calibrate_nominal_level(null_model, null_sampler, lr.recipe, cal);
    }
    std::vector<char> rejected(opts.trials, 0);
    parallel_for(opts.trials, [&](std::size_t t) {
      const std::uint64_t trial_seed = derive_seed(derive_seed(recipe_seed, 0x7e57), t);
      const SampleSet s = alt_sampler(opts.n, derive_seed(trial_seed, 1));
      const RPhiSDConfig cfg = lr.recipe.build(s, derive_seed(trial_seed, 2));
      const GofTestResult res = run_test(s, null_model, cfg, level, opts.n_sims);
      rejected[t] = res.reject ? 1 : 0;
    });
    PowerRow row;
    row.label = lr.label;
    row.level = level;
    row.trials = opts.trials;
    for (char c : rejected) row.rejections += static_cast<std::size_t>(c);
    row.rate = static_cast<double>(row.rejections) / static_cast<double>(opts.trials);
    row.std_error = std::sqrt(row.rate * (1.0 - row.rate) / static_cast<double>(opts.trials));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace rfsd
