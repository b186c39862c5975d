#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "rfsd/models.hpp"

using namespace rfsd;
using rfsd::test::central_diff;
using rfsd::test::close_rel;

TEST_CASE("gaussian score is -x") {
  const ScoreModel m = gaussian_model(2);
  const Vector s = m.score_at(as_span(Vector{Vector::Zero(2)}));
  CHECK(s.norm() == 0.0);
  Vector x(2);
  x << 1.0, -2.0;
  const Vector g = m.score_at(as_span(x));
  CHECK(g[0] == -1.0);
  CHECK(g[1] == 2.0);
  CHECK_THROWS_AS(gaussian_model(0), Error);
}

TEST_CASE("shipped model scores match finite differences of log density") {
  Rng rng = make_rng(11);
  std::vector<ScoreModel> models;
  models.push_back(gaussian_model(5));
  GmmHyperparams hp;
  models.push_back(gmm_posterior_model(gmm_generate_data(hp, 3), hp));
  models.push_back(rbm_model(random_rbm(4, 3, 5)));
  for (const ScoreModel& m : models) {
    for (int t = 0; t < 100; ++t) {
      const Vector x = rfsd::test::random_vector(rng, m.dim);
      const Vector s = m.score_at(as_span(x));
      for (Eigen::Index d = 0; d < x.size(); ++d) {
        const double fd = central_diff([&](const Vector& v) { return m.log_density(as_span(v)); }, x, d);
        CHECK(close_rel(s[d], fd, 1e-5, 1e-3));
      }
    }
  }
}

TEST_CASE("gmm posterior score matches symbolic oracle") {
  GmmHyperparams hp;
  const ScoreModel m = gmm_posterior_model({-1.2, 0.4, 2.0, 0.7}, hp);
  Vector th(2);
  th << 0.3, 0.8;
  const Vector s = m.score_at(as_span(th));
  CHECK(s[0] == doctest::Approx(-0.44633199230383930961).epsilon(1e-12));
  CHECK(s[1] == doctest::Approx(-1.1487392931840824899).epsilon(1e-12));
  CHECK_THROWS_AS(gmm_posterior_model({}, hp), Error);
}

TEST_CASE("gmm symmetric data at the origin leaves only the prior term") {
  GmmHyperparams hp;
  const ScoreModel m = gmm_posterior_model({-1.5, -0.5, 0.5, 1.5}, hp);
  Vector th = Vector::Zero(2);
  CHECK(m.score_at(as_span(th))[0] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("gmm stochastic score is unbiased") {
  GmmHyperparams hp;
  const std::vector<double> data = gmm_generate_data(hp, 9);
  const ScoreModel m = gmm_posterior_model(data, hp);
  Vector th(2);
  th << 0.4, 0.6;
  const Vector full = m.score_at(as_span(th));
  Rng rng = make_rng(4);
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const int reps = 10000;
  Vector sum = Vector::Zero(2), sumsq = Vector::Zero(2), g(2);
  for (int r = 0; r < reps; ++r) {
    std::shuffle(idx.begin(), idx.end(), rng);
    m.stochastic_score(as_span(th), std::span<const std::size_t>(idx.data(), 30), as_span(g));
    sum += g;
    sumsq += g.cwiseProduct(g);
  }
  const Vector mean = sum / reps;
  for (Eigen::Index d = 0; d < 2; ++d) {
    const double var = sumsq[d] / reps - mean[d] * mean[d];
    CHECK(std::fabs(mean[d] - full[d]) < 4.0 * std::sqrt(var / reps));
  }
}

TEST_CASE("rbm score matches symbolic oracle and reduces to gaussian") {
  RbmParams p;
  p.B.resize(2, 3);
  p.B << 0.5, -1.0, 0.25, 1.5, 0.3, -0.7;
  p.b = Vector(2);
  p.b << 0.2, -0.4;
  p.c = Vector(3);
  p.c << 0.1, -0.3, 0.6;
  Vector x(2);
  x << 0.8, -1.3;
  const Vector s = rbm_model(p).score_at(as_span(x));
  CHECK(s[0] == doctest::Approx(-0.47721187335311937572).epsilon(1e-12));
  CHECK(s[1] == doctest::Approx(0.64739346828438093517).epsilon(1e-12));

  RbmParams z;
  z.B = Matrix::Zero(3, 2);
  z.b = Vector::Zero(3);
  z.c = Vector::Ones(2);
  Vector y(3);
  y << 0.3, -1.0, 2.0;
  CHECK((rbm_model(z).score_at(as_span(y)) + y).norm() == 0.0);

  const RbmParams base = random_rbm(4, 3, 1);
  const RbmParams same = perturb_rbm(base, 0.0, 2);
  CHECK((same.B - base.B).norm() == 0.0);
  RbmParams bad = base;
  bad.b = Vector::Zero(2);
  CHECK_THROWS_AS(rbm_model(bad), Error);
}

TEST_CASE("softplus is stable") {
  CHECK(softplus(1000.0) == 1000.0);
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(softplus(-800.0) >= 0.0);
  CHECK(logistic(0.0) == 0.5);
}

TEST_CASE("sampler moments") {
  AlternativeParams p;
  p.dim = 1;
  const std::size_t n = 1000000;
  const SampleSet lap = sample_alternative(AlternativeKind::laplace_product, p, n, 1);
  const double lap_var = (lap.points().col(0).array() - lap.mean()[0]).square().mean();
  CHECK(std::fabs(lap_var - 1.0) < 0.01);
  const SampleSet t = sample_alternative(AlternativeKind::student_t, p, n, 2);
  const double t_var = (t.points().col(0).array() - t.mean()[0]).square().mean();
  CHECK(std::fabs(t_var - 5.0 / 3.0) < 0.03 * 5.0 / 3.0);
  const SampleSet g = sample_alternative(AlternativeKind::gaussian, p, n, 3);
  CHECK(std::fabs(g.mean()[0]) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("samplers are deterministic under seed") {
  AlternativeParams p;
  p.dim = 3;
  for (auto kind : {AlternativeKind::gaussian, AlternativeKind::laplace_product, AlternativeKind::student_t}) {
    const SampleSet a = sample_alternative(kind, p, 50, 7);
    const SampleSet b = sample_alternative(kind, p, 50, 7);
    const SampleSet c = sample_alternative(kind, p, 50, 8);
    CHECK((a.points() - b.points()).norm() == 0.0);
    CHECK((a.points() - c.points()).norm() > 0.0);
  }
  p.dim = 4;
  p.rbm = random_rbm(4, 3, 1);
  p.burn_in = 10;
  p.thin = 2;
  const SampleSet r1 = sample_alternative(AlternativeKind::rbm_gibbs, p, 20, 5);
  const SampleSet r2 = sample_alternative(AlternativeKind::rbm_gibbs, p, 20, 5);
  CHECK((r1.points() - r2.points()).norm() == 0.0);
  CHECK_THROWS_AS(parse_alternative_kind("nope"), Error);
}

TEST_CASE("sample set validates and averages rows") {
  Matrix m(3, 2);
  m << 1, 2, 3, 4, 5, 6;
  const SampleSet s(m);
  CHECK(s.mean()[0] == 3.0);
  CHECK(s.mean()[1] == 4.0);
  Matrix bad = m;
  bad(1, 1) = std::nan("");
  CHECK_THROWS_AS(SampleSet{bad}, Error);
  CHECK_THROWS_AS(SampleSet{Matrix(0, 2)}, Error);
}
