#include "rfsd/features.hpp"

#include <cmath>

#include "rfsd/simd/dispatch.hpp"

namespace rfsd {

void FeatureSpec::validate() const {
  if (const auto* imq = std::get_if<ImqFeature>(&stationary)) {
    require(imq->c > 0.0, "IMQ feature requires c' > 0");
    require(imq->beta < 0.0, "IMQ feature requires beta' < 0");
  } else {
    require(std::get<SechFeature>(stationary).scale > 0.0, "sech feature requires a positive scale");
  }
  if (tilt.kind == TiltFunction::Kind::sech_exp) require(tilt.a_prime > 0.0, "tilt requires a' > 0");
}

double feature_log_eval(const FeatureSpec& f, std::span<const double> x, std::span<const double> z) {
  require(x.size() == z.size(), "feature: dimension mismatch");
  double log_f = 0.0;
  if (const auto* imq = std::get_if<ImqFeature>(&f.stationary)) {
    double s = imq->c * imq->c;
    for (std::size_t d = 0; d < x.size(); ++d) s += (x[d] - z[d]) * (x[d] - z[d]);
    log_f = imq->beta * std::log(s);
  } else {
    const double kappa = kSechArgScale * std::get<SechFeature>(f.stationary).scale;
    for (std::size_t d = 0; d < x.size(); ++d) log_f += log_sech(kappa * (x[d] - z[d]));
  }
  return f.tilt.log_eval(x) + log_f;
}

double feature_eval(const FeatureSpec& f, std::span<const double> x, std::span<const double> z) {
  return std::exp(feature_log_eval(f, x, z));
}

Vector feature_grad_log(const FeatureSpec& f, std::span<const double> x, std::span<const double> z) {
  require(x.size() == z.size(), "feature: dimension mismatch");
  const std::size_t dim = x.size();
  Vector g(static_cast<Eigen::Index>(dim));
  f.tilt.grad_log(x, as_span(g));
  if (const auto* imq = std::get_if<ImqFeature>(&f.stationary)) {
    double s = imq->c * imq->c;
    for (std::size_t d = 0; d < dim; ++d) s += (x[d] - z[d]) * (x[d] - z[d]);
    for (std::size_t d = 0; d < dim; ++d)
      g[static_cast<Eigen::Index>(d)] += 2.0 * imq->beta * (x[d] - z[d]) / s;
  } else {
    const double kappa = kSechArgScale * std::get<SechFeature>(f.stationary).scale;
    for (std::size_t d = 0; d < dim; ++d)
      g[static_cast<Eigen::Index>(d)] -= kappa * std::tanh(kappa * (x[d] - z[d]));
  }
  return g;
}

Vector stein_feature_eval(const FeatureSpec& f, const ScoreModel& model, std::span<const double> x,
                          std::span<const double> z) {
  require(x.size() == model.dim, "stein_feature_eval: dimension does not match model");
  const Vector b = model.score_at(x);
  return (b + feature_grad_log(f, x, z)) * feature_eval(f, x, z);
}

Vector applied_feature(const SampleSet& sample, const ScoreModel& model, const FeatureSpec& f,
                       std::span<const double> z) {
  const FeatureWorkspace ws(sample, model, f);
  Matrix scratch;
  Vector out(static_cast<Eigen::Index>(sample.dim()));
  ws.applied(z, scratch, as_span(out));
  return out;
}

FeatureWorkspace::FeatureWorkspace(const SampleSet& sample, const ScoreModel& model,
                                   const FeatureSpec& f)
    : n_(sample.size()), dim_(sample.dim()), feature_(f), x_(sample.points()) {
  f.validate();
  require(dim_ == model.dim, "feature workspace: sample dimension does not match model");
  drift_ = model.score_matrix(x_);
  log_tilt_.resize(static_cast<Eigen::Index>(n_));
  Vector xi(static_cast<Eigen::Index>(dim_)), g(static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < n_; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    xi = x_.row(r).transpose();
    log_tilt_[r] = f.tilt.log_eval(as_span(xi));
    f.tilt.grad_log(as_span(xi), as_span(g));
    drift_.row(r) += g.transpose();
  }
}

void FeatureWorkspace::stein_block(std::span<const double> z, Matrix& out) const {
  require(z.size() == dim_, "stein_block: location dimension mismatch");
  out.resize(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(dim_));
  const simd::FeatureBlock blk{n_, dim_, x_.data(), drift_.data(), log_tilt_.data(), z.data(),
                               out.data()};
  const simd::KernelTable& table = simd::kernels();
  if (const auto* imq = std::get_if<ImqFeature>(&feature_.stationary)) {
    table.imq_stein_features(blk, imq->c * imq->c, imq->beta);
  } else {
    table.sech_stein_features(blk, kSechArgScale * std::get<SechFeature>(feature_.stationary).scale);
  }
}

void FeatureWorkspace::applied(std::span<const double> z, Matrix& scratch,
                               std::span<double> out) const {
  stein_block(z, scratch);
  const double inv_n = 1.0 / static_cast<double>(n_);
  for (std::size_t d = 0; d < dim_; ++d) {
    const double* col = scratch.data() + d * n_;
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += col[i];
    out[d] = s * inv_n;
  }
}

}  // namespace rfsd
