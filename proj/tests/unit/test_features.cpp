#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "rfsd/features.hpp"
#include "rfsd/quadrature.hpp"

using namespace rfsd;
using rfsd::test::central_diff;
using rfsd::test::close_rel;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::vector<FeatureSpec> feature_families(std::size_t dim) {
  const Vector c = Vector::Constant(static_cast<Eigen::Index>(dim), 0.2);
  return {FeatureSpec{ImqFeature{1.0, -0.5}, TiltFunction::unit()},
          FeatureSpec{ImqFeature{0.8, -3.0}, TiltFunction::unit()},
          FeatureSpec{SechFeature{1.1}, TiltFunction::unit()},
          FeatureSpec{SechFeature{0.7}, TiltFunction::sech_exp(1.0).centered_at(c)}};
}

}  // namespace

TEST_CASE("feature values") {
  const FeatureSpec imq{ImqFeature{1.0, -0.5}, TiltFunction::unit()};
  const Vector x = vec({0.4, -0.3});
  CHECK(feature_eval(imq, as_span(x), as_span(x)) == 1.0);

  const double a = 0.6;
  const FeatureSpec sech_f{SechFeature{2.0 * a}, TiltFunction::sech_exp(1.0)};
  const Vector o = vec({0.0});
  for (double z : {-1.0, 0.3, 2.5}) {
    const Vector zv = vec({z});
    CHECK(feature_eval(sech_f, as_span(o), as_span(zv)) ==
          doctest::Approx(std::exp(1.0) * sech(kSechArgScale * 2.0 * a * (-z))).epsilon(1e-14));
  }

  const FeatureSpec untilted{SechFeature{2.0 * a}, TiltFunction::unit()};
  const Vector x1 = vec({0.9});
  const Vector z1 = vec({-0.4});
  const Vector z2 = vec({1.7});
  const double r_tilt = feature_eval(sech_f, as_span(x1), as_span(z1)) / feature_eval(sech_f, as_span(x1), as_span(z2));
  const double r_unit = feature_eval(untilted, as_span(x1), as_span(z1)) / feature_eval(untilted, as_span(x1), as_span(z2));
  CHECK(r_tilt == doctest::Approx(r_unit).epsilon(1e-13));
}

TEST_CASE("stein features match closed forms and symbolic oracle") {
  const ScoreModel g1 = gaussian_model(1);
  const FeatureSpec imq{ImqFeature{1.0, -0.5}, TiltFunction::unit()};
  const Vector o = vec({0.0});
  CHECK(stein_feature_eval(imq, g1, as_span(o), as_span(o))[0] == 0.0);
  const Vector one = vec({1.0});
  CHECK(stein_feature_eval(imq, g1, as_span(one), as_span(o))[0] ==
        doctest::Approx(-std::pow(2.0, -0.5) - std::pow(2.0, -1.5)).epsilon(1e-14));

  const ScoreModel g2 = gaussian_model(2);
  const Vector x = vec({0.7, -0.3});
  const Vector z = vec({-0.5, 0.4});
  const FeatureSpec sech_f{SechFeature{1.4}, TiltFunction::sech_exp(1.0).centered_at(vec({0.1, 0.2}))};
  const Vector t = stein_feature_eval(sech_f, g2, as_span(x), as_span(z));
  CHECK(t[0] == doctest::Approx(-2.4005570051250894173).epsilon(1e-12));
  CHECK(t[1] == doctest::Approx(1.6906995022787835334).epsilon(1e-12));
  const FeatureSpec imq2{ImqFeature{0.9, -2.5}, TiltFunction::unit()};
  const Vector u = stein_feature_eval(imq2, g2, as_span(x), as_span(z));
  CHECK(u[0] == doctest::Approx(-0.23253510578809779994).epsilon(1e-12));
  CHECK(u[1] == doctest::Approx(0.12692810396768864503).epsilon(1e-12));
}

TEST_CASE("stein features match finite differences of log(p Phi)") {
  Rng rng = make_rng(31);
  for (std::size_t dim : {1u, 3u}) {
    const ScoreModel g = gaussian_model(dim);
    for (const FeatureSpec& f : feature_families(dim)) {
      for (int t = 0; t < 100; ++t) {
        const Vector x = rfsd::test::random_vector(rng, dim);
        const Vector z = rfsd::test::random_vector(rng, dim);
        const Vector s = stein_feature_eval(f, g, as_span(x), as_span(z));
        const double phi = feature_eval(f, as_span(x), as_span(z));
        const Vector glog = feature_grad_log(f, as_span(x), as_span(z));
        for (Eigen::Index d = 0; d < x.size(); ++d) {
          const double fd = central_diff(
              [&](const Vector& v) { return -0.5 * v.squaredNorm() + feature_log_eval(f, as_span(v), as_span(z)); }, x, d);
          CHECK(close_rel(s[d], fd * phi, 1e-6, 1e-6 * phi));
          const double fdl = central_diff([&](const Vector& v) { return feature_log_eval(f, as_span(v), as_span(z)); }, x, d);
          CHECK(close_rel(glog[d], fdl, 1e-6, 1e-6));
        }
      }
    }
  }
}

TEST_CASE("stein features are finite on a wide sweep") {
  Rng rng = make_rng(32);
  std::uniform_real_distribution<double> unif(-50.0, 50.0);
  const ScoreModel g = gaussian_model(2);
  for (const FeatureSpec& f : feature_families(2)) {
    for (int t = 0; t < 2500; ++t) {
      const Vector x = vec({unif(rng), unif(rng)});
      const Vector z = vec({unif(rng), unif(rng)});
      CHECK(stein_feature_eval(f, g, as_span(x), as_span(z)).allFinite());
    }
  }
}

TEST_CASE("stein features have mean zero under the target") {
  const ScoreModel g = gaussian_model(1);
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  const std::vector<FeatureSpec> fams = {FeatureSpec{ImqFeature{1.0, -0.5}, TiltFunction::unit()},
                                         FeatureSpec{SechFeature{0.8}, TiltFunction::sech_exp(1.0)}};
  for (const FeatureSpec& f : fams) {
    for (int i = 0; i < 10; ++i) {
      const Vector z = vec({-3.0 + 0.7 * i});
      const auto h = [&](double x) {
        const Vector xv = vec({x});
        return stein_feature_eval(f, g, as_span(xv), as_span(z))[0] * norm * std::exp(-0.5 * x * x);
      };
      CHECK(std::fabs(integrate_real_line(h, 0.0, 12.0).value) < 1e-6);
    }
  }
}

TEST_CASE("applied features are linear in the empirical measure") {
  Rng rng = make_rng(33);
  const ScoreModel g = gaussian_model(2);
  const FeatureSpec f{SechFeature{0.9}, TiltFunction::sech_exp(1.0)};
  const SampleSet a(rfsd::test::random_matrix(rng, 7, 2));
  const SampleSet b(rfsd::test::random_matrix(rng, 13, 2));
  const SampleSet ab = SampleSet::concat(a, b);
  const Vector z = vec({0.3, -0.8});
  const Vector va = applied_feature(a, g, f, as_span(z));
  const Vector vb = applied_feature(b, g, f, as_span(z));
  const Vector vab = applied_feature(ab, g, f, as_span(z));
  CHECK((vab - (7.0 * va + 13.0 * vb) / 20.0).norm() < 1e-13 * (1.0 + vab.norm()));

  const SampleSet single(Matrix(a.points().topRows(1)));
  const Vector p = single.row(0);
  CHECK((applied_feature(single, g, f, as_span(z)) - stein_feature_eval(f, g, as_span(p), as_span(z))).norm() == 0.0);
}

TEST_CASE("antithetic pair keeps only the even part") {
  const ScoreModel g = gaussian_model(1);
  const FeatureSpec f{ImqFeature{1.0, -0.5}, TiltFunction::unit()};
  const double x = 0.8;
  Matrix pts(2, 1);
  pts << x, -x;
  const SampleSet s(pts);
  for (double z : {-1.5, 0.4, 2.0}) {
    const Vector zv = vec({z});
    const Vector mz = vec({-z});
    const Vector xv = vec({x});
    // (T Phi)(-x, z) = -(T Phi)(x, -z), so the pair average is odd in z.
    const double plus = stein_feature_eval(f, g, as_span(xv), as_span(zv))[0];
    const double minus = stein_feature_eval(f, g, as_span(xv), as_span(mz))[0];
    CHECK(applied_feature(s, g, f, as_span(zv))[0] == doctest::Approx(0.5 * (plus - minus)).epsilon(1e-14));
    CHECK(applied_feature(s, g, f, as_span(zv))[0] ==
          doctest::Approx(-applied_feature(s, g, f, as_span(mz))[0]).epsilon(1e-14));
  }
}

TEST_CASE("workspace block equals pointwise stein features") {
  Rng rng = make_rng(34);
  const ScoreModel g = gaussian_model(3);
  const SampleSet s(rfsd::test::random_matrix(rng, 19, 3));
  for (const FeatureSpec& f : feature_families(3)) {
    const FeatureWorkspace ws(s, g, f);
    const Vector z = rfsd::test::random_vector(rng, 3);
    Matrix block;
    ws.stein_block(as_span(z), block);
    for (std::size_t n = 0; n < s.size(); ++n) {
      const Vector ref = stein_feature_eval(f, g, as_span(Vector{s.row(n)}), as_span(z));
      for (Eigen::Index d = 0; d < 3; ++d)
        CHECK(close_rel(block(static_cast<Eigen::Index>(n), d), ref[d], 1e-12, 1e-300));
    }
  }
}
