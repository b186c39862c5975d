#include "rfsd/models.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "rfsd/random.hpp"

namespace rfsd {

Vector ScoreModel::score_at(std::span<const double> x) const {
  Vector out(static_cast<Eigen::Index>(dim));
  score(x, as_span(out));
  return out;
}

Matrix ScoreModel::score_matrix(const Matrix& points) const {
  require(static_cast<std::size_t>(points.cols()) == dim,
          "score_matrix: sample dimension " + std::to_string(points.cols()) +
              " does not match model dimension " + std::to_string(dim));
  Matrix out(points.rows(), points.cols());
  Vector x(points.cols()), b(points.cols());
  for (Eigen::Index n = 0; n < points.rows(); ++n) {
    x = points.row(n).transpose();
    score(as_span(x), as_span(b));
    out.row(n) = b.transpose();
  }
  return out;
}

SampleSet::SampleSet(Matrix points) : points_(std::move(points)) {
  require(points_.rows() >= 1, "SampleSet: need at least one point");
  require(points_.cols() >= 1, "SampleSet: need dimension >= 1");
  require(points_.allFinite(), "SampleSet: non-finite entry");
  // Row order summation, then one division.
  mean_ = Vector::Zero(points_.cols());
  for (Eigen::Index n = 0; n < points_.rows(); ++n) mean_ += points_.row(n).transpose();
  mean_ /= static_cast<double>(points_.rows());
}

SampleSet SampleSet::concat(const SampleSet& a, const SampleSet& b) {
  require(a.dim() == b.dim(), "SampleSet::concat: dimension mismatch");
  Matrix m(a.points_.rows() + b.points_.rows(), a.points_.cols());
  m << a.points_, b.points_;
  return SampleSet(std::move(m));
}

ScoreModel gaussian_model(std::size_t dim) {
  require(dim >= 1, "gaussian_model: dim must be >= 1");
  ScoreModel m;
  m.dim = dim;
  m.label = "gaussian";
  m.score = [](std::span<const double> x, std::span<double> out) {
    for (std::size_t d = 0; d < x.size(); ++d) out[d] = -x[d];
  };
  m.log_density = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return -0.5 * s;
  };
  return m;
}

double softplus(double t) { return t > 30.0 ? t : std::log1p(std::exp(t)); }

double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// ---------------------------------------------------------------------------
// Gaussian mixture posterior

std::vector<double> gmm_generate_data(const GmmHyperparams& hp, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> noise(0.0, std::sqrt(hp.sigmax_sq));
  std::bernoulli_distribution first(hp.weight);
  std::vector<double> data(hp.n_data);
  for (double& x : data) {
    const double loc = first(rng) ? hp.theta1_true : hp.theta1_true + hp.theta2_true;
    x = loc + noise(rng);
  }
  return data;
}

namespace {

struct GmmTerms {
  double log_lik;
  double g1;
  double g2;
};

// log(w N(x|t1,s2) + (1-w) N(x|t1+t2,s2)) and its gradient in (t1, t2).
GmmTerms gmm_datum(double x, double t1, double t2, const GmmHyperparams& hp) {
  const double r1 = x - t1;
  const double r2 = x - t1 - t2;
  const double l1 = std::log(hp.weight) - 0.5 * r1 * r1 / hp.sigmax_sq;
  const double l2 = std::log1p(-hp.weight) - 0.5 * r2 * r2 / hp.sigmax_sq;
  const double hi = std::max(l1, l2);
  const double lse = hi + std::log(std::exp(l1 - hi) + std::exp(l2 - hi));
  const double p1 = std::exp(l1 - lse);
  const double p2 = std::exp(l2 - lse);
  const double norm = -0.5 * std::log(2.0 * std::numbers::pi * hp.sigmax_sq);
  return {lse + norm, (p1 * r1 + p2 * r2) / hp.sigmax_sq, p2 * r2 / hp.sigmax_sq};
}

}  // namespace

ScoreModel gmm_posterior_model(std::vector<double> data, const GmmHyperparams& hp) {
  require(!data.empty(), "gmm_posterior_model: data must be nonempty");
  auto shared = std::make_shared<const std::vector<double>>(std::move(data));
  ScoreModel m;
  m.dim = 2;
  m.label = "gmm_posterior";
  m.data_size = shared->size();
  m.score = [shared, hp](std::span<const double> th, std::span<double> out) {
    double g1 = -th[0] / hp.sigma1_sq;
    double g2 = -th[1] / hp.sigma2_sq;
    for (double x : *shared) {
      const GmmTerms t = gmm_datum(x, th[0], th[1], hp);
      g1 += t.g1;
      g2 += t.g2;
    }
    out[0] = g1;
    out[1] = g2;
  };
  m.stochastic_score = [shared, hp](std::span<const double> th, std::span<const std::size_t> batch,
                                    std::span<double> out) {
    double g1 = 0.0, g2 = 0.0;
    for (std::size_t i : batch) {
      const GmmTerms t = gmm_datum((*shared)[i], th[0], th[1], hp);
      g1 += t.g1;
      g2 += t.g2;
    }
    const double scale = static_cast<double>(shared->size()) / static_cast<double>(batch.size());
    out[0] = -th[0] / hp.sigma1_sq + scale * g1;
    out[1] = -th[1] / hp.sigma2_sq + scale * g2;
  };
  m.log_density = [shared, hp](std::span<const double> th) {
    double lp = -0.5 * th[0] * th[0] / hp.sigma1_sq - 0.5 * th[1] * th[1] / hp.sigma2_sq;
    for (double x : *shared) lp += gmm_datum(x, th[0], th[1], hp).log_lik;
    return lp;
  };
  return m;
}

// ---------------------------------------------------------------------------
// RBM

RbmParams random_rbm(std::size_t dx, std::size_t dh, std::uint64_t seed) {
  require(dx >= 1 && dh >= 1, "random_rbm: sizes must be positive");
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution coin(0.5);
  RbmParams p;
  p.B.resize(static_cast<Eigen::Index>(dx), static_cast<Eigen::Index>(dh));
  for (Eigen::Index j = 0; j < p.B.cols(); ++j)
    for (Eigen::Index i = 0; i < p.B.rows(); ++i) p.B(i, j) = coin(rng) ? 1.0 : -1.0;
  p.b.resize(static_cast<Eigen::Index>(dx));
  for (auto& v : p.b) v = normal(rng);
  p.c.resize(static_cast<Eigen::Index>(dh));
  for (auto& v : p.c) v = normal(rng);
  return p;
}

RbmParams perturb_rbm(const RbmParams& p, double sigma_per, std::uint64_t seed) {
  RbmParams out = p;
  if (sigma_per == 0.0) return out;
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, sigma_per);
  for (Eigen::Index j = 0; j < out.B.cols(); ++j)
    for (Eigen::Index i = 0; i < out.B.rows(); ++i) out.B(i, j) += normal(rng);
  return out;
}

namespace {
void check_rbm(const RbmParams& p) {
  require(p.B.rows() == p.b.size(), "rbm_model: B rows must match length of b");
  require(p.B.cols() == p.c.size(), "rbm_model: B columns must match length of c");
  require(p.B.allFinite() && p.b.allFinite() && p.c.allFinite(), "rbm_model: non-finite parameter");
  require(p.B.rows() >= 1 && p.B.cols() >= 1, "rbm_model: empty parameter matrix");
}
}  // namespace

ScoreModel rbm_model(const RbmParams& params) {
  check_rbm(params);
  auto p = std::make_shared<const RbmParams>(params);
  ScoreModel m;
  m.dim = static_cast<std::size_t>(p->B.rows());
  m.label = "rbm";
  m.score = [p](std::span<const double> x, std::span<double> out) {
    const Eigen::Map<const Vector> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    Vector act = p->B.transpose() * xv + p->c;
    for (auto& a : act) a = logistic(a);
    Eigen::Map<Vector> ov(out.data(), static_cast<Eigen::Index>(out.size()));
    ov = p->b - xv + p->B * act;
  };
  m.log_density = [p](std::span<const double> x) {
    const Eigen::Map<const Vector> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    const Vector act = p->B.transpose() * xv + p->c;
    double lp = p->b.dot(xv) - 0.5 * xv.squaredNorm();
    for (double a : act) lp += softplus(a);
    return lp;
  };
  return m;
}

SampleSet rbm_gibbs_sample(const RbmParams& p, std::size_t n, std::size_t burn_in, std::size_t thin,
                           std::uint64_t seed) {
  check_rbm(p);
  require(n >= 1, "rbm_gibbs_sample: n must be >= 1");
  require(thin >= 1, "rbm_gibbs_sample: thin must be >= 1");
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Eigen::Index dx = p.B.rows();
  const Eigen::Index dh = p.B.cols();
  Vector x(dx), h(dh);
  for (auto& v : x) v = normal(rng);
  Matrix out(static_cast<Eigen::Index>(n), dx);
  auto sweep = [&] {
    const Vector act = p.B.transpose() * x + p.c;
    for (Eigen::Index j = 0; j < dh; ++j) h(j) = unif(rng) < logistic(act(j)) ? 1.0 : 0.0;
    x = p.b + p.B * h;
    for (auto& v : x) v += normal(rng);
  };
  for (std::size_t t = 0; t < burn_in; ++t) sweep();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t t = 0; t < thin; ++t) sweep();
    out.row(static_cast<Eigen::Index>(k)) = x.transpose();
  }
  return SampleSet(std::move(out));
}

// ---------------------------------------------------------------------------
// Alternative samplers

AlternativeKind parse_alternative_kind(std::string_view name) {
  if (name == "gaussian") return AlternativeKind::gaussian;
  if (name == "laplace_product" || name == "laplace") return AlternativeKind::laplace_product;
  if (name == "student_t" || name == "t") return AlternativeKind::student_t;
  if (name == "gmm_sgld_target" || name == "gmm") return AlternativeKind::gmm_sgld_target;
  if (name == "rbm_gibbs" || name == "rbm") return AlternativeKind::rbm_gibbs;
  throw Error("unknown sampler kind '" + std::string(name) + "'");
}

std::string_view alternative_kind_name(AlternativeKind kind) {
  switch (kind) {
    case AlternativeKind::gaussian:
      return "gaussian";
    case AlternativeKind::laplace_product:
      return "laplace_product";
    case AlternativeKind::student_t:
      return "student_t";
    case AlternativeKind::gmm_sgld_target:
      return "gmm_sgld_target";
    case AlternativeKind::rbm_gibbs:
      return "rbm_gibbs";
  }
  return "unknown";
}

SampleSet sample_alternative(AlternativeKind kind, const AlternativeParams& params, std::size_t n,
                             std::uint64_t seed) {
  require(n >= 1, "sample_alternative: n must be >= 1");
  require(params.dim >= 1, "sample_alternative: dim must be >= 1");
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(params.dim);
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal;
  switch (kind) {
    case AlternativeKind::gaussian: {
      Matrix m(rows, cols);
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index d = 0; d < cols; ++d) m(i, d) = normal(rng);
      return SampleSet(std::move(m));
    }
    case AlternativeKind::laplace_product: {
      // Laplace(0, 1/sqrt(2)) has unit variance.
      const double scale = 1.0 / std::numbers::sqrt2;
      std::uniform_real_distribution<double> unif(-0.5, 0.5);
      Matrix m(rows, cols);
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index d = 0; d < cols; ++d) {
          double u = unif(rng);
          while (u == -0.5) u = unif(rng);
          m(i, d) = -scale * std::copysign(std::log1p(-2.0 * std::fabs(u)), u);
        }
      return SampleSet(std::move(m));
    }
    case AlternativeKind::student_t: {
      require(params.df > 0.0, "sample_alternative: student_t df must be positive");
      std::gamma_distribution<double> chi2(params.df / 2.0, 2.0);
      Matrix m(rows, cols);
      for (Eigen::Index i = 0; i < rows; ++i) {
        const double scale = 1.0 / std::sqrt(chi2(rng) / params.df);
        for (Eigen::Index d = 0; d < cols; ++d) m(i, d) = scale * normal(rng);
      }
      return SampleSet(std::move(m));
    }
    case AlternativeKind::gmm_sgld_target: {
      // Observations of the mixture that defines the posterior's likelihood.
      GmmHyperparams hp = params.gmm;
      hp.n_data = n;
      const std::vector<double> data = gmm_generate_data(hp, seed);
      Matrix m(rows, 1);
      for (Eigen::Index i = 0; i < rows; ++i) m(i, 0) = data[static_cast<std::size_t>(i)];
      return SampleSet(std::move(m));
    }
    case AlternativeKind::rbm_gibbs:
      return rbm_gibbs_sample(params.rbm, n, params.burn_in, params.thin, seed);
  }
  throw Error("sample_alternative: unknown kind");
}

}  // namespace rfsd
