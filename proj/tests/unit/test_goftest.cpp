#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "rfsd/goftest.hpp"
#include "rfsd/parallel.hpp"

using namespace rfsd;

namespace {

SampleSet gaussian_sample(std::size_t n, std::size_t dim, std::uint64_t seed) {
  AlternativeParams p;
  p.dim = dim;
  return sample_alternative(AlternativeKind::gaussian, p, n, seed);
}

TestFeatures synthetic_features(const Matrix& m, std::size_t dim, std::size_t M, double r) {
  TestFeatures tf;
  tf.matrix = m;
  tf.dim = dim;
  tf.M = M;
  tf.r = r;
  return tf;
}

// Two-sample Kolmogorov-Smirnov statistic of sorted inputs.
double ks_two_sample(const std::vector<double>& a, const std::vector<double>& b) {
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

// Asymptotic two-sample KS p-value with the usual small-sample correction.
double ks_p_value(double d, double ne) {
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) sum += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace

TEST_CASE("statistic matches N times the squared estimate") {
  const ScoreModel g = gaussian_model(3);
  const SampleSet s = gaussian_sample(400, 3, 1);
  for (Family fam : {Family::l1_imq, Family::l2_sechexp}) {
    const RPhiSDConfig cfg = default_config(0.25, 3, fam, s);
    const TestFeatures tf = build_test_features(s, g, cfg);
    const double v = rphisd(s, g, cfg).value;
    CHECK(test_statistic(tf) == doctest::Approx(400.0 * v * v).epsilon(1e-10));
    CHECK(tf.matrix.cols() == 30);
  }
}

TEST_CASE("single draw with r = 2 scales features by nu^{-1/2}") {
  const ScoreModel g = gaussian_model(2);
  const SampleSet s = gaussian_sample(50, 2, 2);
  RPhiSDConfig cfg = default_config(0.25, 2, Family::l2_sechexp, s);
  cfg.M = 1;
  const TestFeatures tf = build_test_features(s, g, cfg);
  CHECK(tf.matrix.cols() == 2);
  const SampleSet ordered = canonical_order(s);
  const FeatureWorkspace ws(ordered, g, cfg.centered_feature(ordered.mean()));
  Matrix block;
  const Vector z = tf.z.row(0).transpose();
  ws.stein_block(as_span(z), block);
  const double scale = std::exp(-0.5 * tf.log_density[0]);
  CHECK((tf.matrix - block * scale).norm() <= 1e-12 * tf.matrix.norm());
}

TEST_CASE("column means do not depend on row order") {
  const ScoreModel g = gaussian_model(2);
  const SampleSet s = gaussian_sample(60, 2, 3);
  const Matrix rev = s.points().colwise().reverse();
  const RPhiSDConfig cfg = default_config(0.25, 2, Family::l1_imq, s);
  const TestFeatures a = build_test_features(s, g, cfg);
  const TestFeatures b = build_test_features(SampleSet(rev), g, cfg);
  CHECK((a.matrix.colwise().mean() - b.matrix.colwise().mean()).norm() == 0.0);
}

TEST_CASE("covariance estimate") {
  Rng rng = make_rng(51);
  Matrix m = rfsd::test::random_matrix(rng, 200, 4);
  m.col(2).setConstant(1.5);
  const Matrix sig = estimate_covariance(synthetic_features(m, 2, 2, 2.0));
  CHECK(sig.row(2).norm() == 0.0);
  CHECK(sig.col(2).norm() == 0.0);
  CHECK((sig - sig.transpose()).cwiseAbs().maxCoeff() <= 1e-12);

  const std::size_t n = 100000;
  const Matrix big = rfsd::test::random_matrix(rng, n, 3);
  const Matrix s3 = estimate_covariance(synthetic_features(big, 3, 1, 2.0));
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) {
      const double se = (i == j ? std::sqrt(2.0) : 1.0) / std::sqrt(static_cast<double>(n));
      CHECK(std::fabs(s3(i, j) - (i == j ? 1.0 : 0.0)) < 3.0 * se);
    }
}

TEST_CASE("null simulation") {
  SUBCASE("zero covariance") {
    const auto d = simulate_null(Matrix::Zero(4, 4), 1.0, 2, 2, 500, 1);
    CHECK(d.size() == 500);
    CHECK(std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; }));
  }
  SUBCASE("chi square with one degree of freedom") {
    const auto d = simulate_null(Matrix::Identity(1, 1), 2.0, 1, 1, 100000, 2);
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= static_cast<double>(d.size());
    CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
    CHECK(null_quantile(d, 0.05) == doctest::Approx(3.841458820694124).epsilon(0.05));
    CHECK(std::is_sorted(d.begin(), d.end()));
  }
  SUBCASE("squared sum of absolute normals") {
    // E(|a| + |b|)^2 = 2 + 4/pi, confirmed by a 4e6-draw simulation (3.2762).
    const auto d = simulate_null(Matrix::Identity(2, 2), 1.0, 1, 2, 100000, 3);
    double mean = 0.0, sq = 0.0;
    for (double v : d) {
      mean += v;
      sq += v * v;
    }
    mean /= static_cast<double>(d.size());
    const double sd = std::sqrt(sq / static_cast<double>(d.size()) - mean * mean);
    CHECK(std::fabs(mean - (2.0 + 4.0 / std::numbers::pi)) < 3.0 * sd / std::sqrt(static_cast<double>(d.size())));
  }
  SUBCASE("validation and determinism") {
    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 1) = std::nan("");
    CHECK_THROWS_AS(simulate_null(bad, 2.0, 1, 2, 200, 1), Error);
    CHECK_THROWS_AS(simulate_null(Matrix::Identity(3, 3), 2.0, 1, 2, 200, 1), Error);
    CHECK_THROWS_AS(simulate_null(Matrix::Identity(2, 2), 2.0, 1, 2, 50, 1), Error);
    Matrix singular = Matrix::Ones(3, 3);
    CHECK_NOTHROW(simulate_null(singular, 2.0, 1, 3, 200, 1));
    const auto a = simulate_null(Matrix::Identity(2, 2) * 2.0, 1.5, 2, 1, 3000, 9);
    set_num_threads(3);
    const auto b = simulate_null(Matrix::Identity(2, 2) * 2.0, 1.5, 2, 1, 3000, 9);
    set_num_threads(1);
    CHECK(a == b);
  }
}

TEST_CASE("p value and quantile conventions") {
  std::vector<double> d(100);
  for (int i = 0; i < 100; ++i) d[static_cast<std::size_t>(i)] = i + 1;
  CHECK(null_p_value(d, 0.5) == 1.0);
  CHECK(null_p_value(d, 1000.0) == doctest::Approx(1.0 / 101.0));
  CHECK(null_p_value(d, 96.0) == doctest::Approx(6.0 / 101.0));
  CHECK(null_quantile(d, 0.05) == 95.0);
}

TEST_CASE("statistic of synthetic null features matches the simulated null") {
  // Features are mean-zero Gaussians with a known covariance, so N times the
  // functional of the column means follows the simulated law exactly.
  Rng rng = make_rng(52);
  const std::size_t dim = 2, M = 2, k = dim * M, n = 50, reps = 10000;
  Matrix L = Matrix::Zero(k, k);
  L << 1.0, 0, 0, 0, 0.5, 0.8, 0, 0, -0.3, 0.2, 0.9, 0, 0.1, 0.4, -0.2, 0.7;
  const Matrix sigma = L * L.transpose();
  std::vector<double> stats(reps);
  std::normal_distribution<double> normal;
  for (std::size_t t = 0; t < reps; ++t) {
    Matrix m(n, k);
    for (std::size_t i = 0; i < n; ++i) {
      Vector g(k);
      for (auto& v : g) v = normal(rng);
      m.row(static_cast<Eigen::Index>(i)) = (L * g).transpose();
    }
    stats[t] = test_statistic(synthetic_features(m, dim, M, 1.0));
  }
  std::sort(stats.begin(), stats.end());
  const auto null = simulate_null(sigma, 1.0, dim, M, reps, 77);
  const double ks = ks_two_sample(stats, null);
  CHECK(ks_p_value(ks, reps / 2.0) > 0.01);
}

TEST_CASE("run_test result consistency") {
  const ScoreModel g = gaussian_model(2);
  const SampleSet s = gaussian_sample(300, 2, 5);
  const RPhiSDConfig cfg = default_config(0.25, 2, Family::l1_imq, s);
  const GofTestResult a = run_test(s, g, cfg, 0.05, 2000);
  CHECK(a.reject == (a.statistic > a.threshold));
  CHECK(a.p_value > 0.0);
  CHECK(a.p_value <= 1.0);
  CHECK(a.n_null_sims == 2000);
  const GofTestResult b = run_test(s, g, cfg, 0.05, 2000);
  CHECK(a.statistic == b.statistic);
  CHECK(a.p_value == b.p_value);
  CHECK_THROWS_AS(run_test(s, g, cfg, 1.5, 2000), Error);

  AlternativeParams p;
  p.dim = 2;
  const SampleSet lap = sample_alternative(AlternativeKind::laplace_product, p, 2000, 6);
  const GofTestResult r = run_test(lap, g, default_config(0.25, 2, Family::l1_imq, lap), 0.05, 2000);
  CHECK(r.reject);
  CHECK(r.p_value < 0.05);

  const SampleSet ref = gaussian_sample(300, 2, 99);
  GofOptions opts;
  opts.n_sims = 2000;
  opts.covariance_sample = &ref;
  const GofTestResult c = run_test(s, g, cfg, opts);
  CHECK(c.statistic == a.statistic);
  CHECK(c.threshold != a.threshold);
}

TEST_CASE("statistic over N grows linearly under a fixed alternative") {
  const ScoreModel g = gaussian_model(1);
  AlternativeParams p;
  p.dim = 1;
  std::vector<double> med;
  for (std::size_t n : {500u, 1000u, 2000u}) {
    std::vector<double> v;
    for (std::uint64_t t = 0; t < 20; ++t) {
      const SampleSet s = sample_alternative(AlternativeKind::laplace_product, p, n, derive_seed(n, t));
      RPhiSDConfig cfg = default_config(0.25, 1, Family::l1_imq, s);
      cfg.seed = t;
      v.push_back(test_statistic(build_test_features(s, g, cfg)));
    }
    std::sort(v.begin(), v.end());
    med.push_back(0.5 * (v[9] + v[10]));
  }
  CHECK(med[1] > med[0]);
  CHECK(med[2] > med[1]);
  CHECK(med[2] / med[0] > 2.0);
}

TEST_CASE("calibrated level never exceeds the target") {
  const ScoreModel g = gaussian_model(2);
  SampleGenerator gen = [](std::size_t n, std::uint64_t seed) { return gaussian_sample(n, 2, seed); };
  ConfigRecipe rc;
  rc.overrides.M = 2;
  CalibrationOptions co;
  co.n_cal = 20;
  co.n = 100;
  co.n_sims = 500;
  co.seed = 3;
  const double level = calibrate_nominal_level(g, gen, rc, co);
  CHECK(level <= 0.05);
  CHECK(level > 0.0);
  CHECK(calibrate_nominal_level(g, gen, rc, co) == level);
  co.n_cal = 10;
  CHECK_THROWS_AS(calibrate_nominal_level(g, gen, rc, co), Error);
}

TEST_CASE("power experiment under the null reports its level") {
  const ScoreModel g = gaussian_model(1);
  SampleGenerator gen = [](std::size_t n, std::uint64_t seed) { return gaussian_sample(n, 1, seed); };
  PowerOptions po;
  po.n = 200;
  po.trials = 60;
  po.n_sims = 1000;
  po.calibrate = false;
  const auto rows = power_experiment(g, gen, gen, {{"l1-imq", ConfigRecipe{}}}, po);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].trials == 60);
  CHECK(rows[0].rate <= 0.05 + 3.0 * std::sqrt(0.05 * 0.95 / 60.0));
  CHECK(rows[0].std_error == doctest::Approx(std::sqrt(rows[0].rate * (1 - rows[0].rate) / 60.0)));
}
