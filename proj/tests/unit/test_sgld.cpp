#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "rfsd/sgld.hpp"

using namespace rfsd;

namespace {

ScoreModel flat_model(std::size_t dim) {
  ScoreModel m;
  m.dim = dim;
  m.label = "flat";
  m.score = [](std::span<const double>, std::span<double> out) {
    for (double& v : out) v = 0.0;
  };
  return m;
}

ScoreModel gmm_target() {
  GmmHyperparams hp;
  return gmm_posterior_model(gmm_generate_data(hp, 0), hp);
}

}  // namespace

TEST_CASE("zero score gives a gaussian random walk") {
  SgldConfig cfg;
  cfg.step = 0.04;
  cfg.n_iters = 200000;
  cfg.burn_in = 0;
  cfg.init = Vector::Zero(1);
  const SampleSet chain = run_sgld(flat_model(1), cfg);
  const Vector x = chain.points().col(0);
  double s = 0.0, s2 = 0.0;
  double prev = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double inc = x[i] - prev;
    prev = x[i];
    s += inc;
    s2 += inc * inc;
  }
  const double n = static_cast<double>(x.size());
  const double var = s2 / n - (s / n) * (s / n);
  CHECK(var == doctest::Approx(0.04).epsilon(0.01));
}

TEST_CASE("fixed seed reproduces the chain") {
  const ScoreModel m = gmm_target();
  SgldConfig cfg;
  cfg.n_iters = 500;
  cfg.seed = 3;
  const SampleSet a = run_sgld(m, cfg);
  const SampleSet b = run_sgld(m, cfg);
  CHECK((a.points() - b.points()).norm() == 0.0);
  cfg.seed = 4;
  CHECK((run_sgld(m, cfg).points() - a.points()).norm() > 0.0);
  CHECK(a.size() == 500);
}

TEST_CASE("full batch chain on a gaussian has the biased AR(1) variance") {
  // x' = (1 - e/2) x + N(0, e): stationary variance e / (1 - (1 - e/2)^2)
  // = 1 / (1 - e/4), confirmed by a 2e6-step simulation.
  const double eps = 0.01;
  SgldConfig cfg;
  cfg.step = eps;
  cfg.n_iters = 1000000;
  cfg.burn_in = 5000;
  cfg.init = Vector::Zero(1);
  const SampleSet chain = run_sgld(gaussian_model(1), cfg);
  const double mean = chain.mean()[0];
  const double var = (chain.points().col(0).array() - mean).square().mean();
  CHECK(var == doctest::Approx(1.0 / (1.0 - eps / 4.0)).epsilon(0.1));
}

TEST_CASE("chains on the mixture posterior stay finite for every grid step") {
  const ScoreModel m = gmm_target();
  for (double step : {0.05, 0.01, 0.005, 0.001}) {
    SgldConfig cfg;
    cfg.step = step;
    cfg.n_iters = 1000;
    CHECK(run_sgld(m, cfg).points().allFinite());
  }
}

TEST_CASE("configuration validation") {
  const ScoreModel m = gmm_target();
  SgldConfig cfg;
  cfg.step = 0.0;
  CHECK_THROWS_AS(run_sgld(m, cfg), Error);
  cfg.step = 0.01;
  cfg.minibatch = 1000;
  CHECK_THROWS_AS(run_sgld(m, cfg), Error);
  cfg.minibatch = 30;
  cfg.init = Vector::Zero(3);
  CHECK_THROWS_AS(run_sgld(m, cfg), Error);
  SgldConfig d;
  d.n_iters = 900;
  CHECK(d.burn_in_iters() == 100);
}

TEST_CASE("step selection") {
  const ScoreModel m = gmm_target();
  SgldConfig base;
  base.n_iters = 300;
  const QualityMeasure ksd = ksd_measure("ksd", BaseKernel::imq(1.0, -0.5));
  SelectionOptions so;
  so.replicates = 2;

  const SelectionTable one = select_step_size({0.01}, m, base, {ksd}, so);
  CHECK(one.selected.at(0) == 0.01);

  QualityMeasure scaled{"scaled", [&](const SampleSet& s, const ScoreModel& mm, std::uint64_t seed) {
                          return 7.5 * ksd.eval(s, mm, seed);
                        }};
  const std::vector<double> grid = {0.05, 0.01, 0.001};
  const SelectionTable t = select_step_size(grid, m, base, {ksd, scaled}, so);
  CHECK(t.selected[0] == t.selected[1]);
  const SelectionTable t2 = select_step_size(grid, m, base, {ksd, scaled}, so);
  CHECK(t.medians == t2.medians);
  CHECK_THROWS_AS(select_step_size({}, m, base, {ksd}, so), Error);
}
