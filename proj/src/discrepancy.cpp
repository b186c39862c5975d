#include "rfsd/discrepancy.hpp"

#include <chrono>
#include <cmath>

#include "rfsd/kernels.hpp"
#include "rfsd/parallel.hpp"
#include "rfsd/random.hpp"

namespace rfsd {

Family parse_family(std::string_view name) {
  if (name == "l1-imq" || name == "l1_imq") return Family::l1_imq;
  if (name == "l2-sechexp" || name == "l2_sechexp") return Family::l2_sechexp;
  if (name == "custom") return Family::custom;
  throw Error("unknown family '" + std::string(name) + "' (expected l1-imq or l2-sechexp)");
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::l1_imq:
      return "l1-imq";
    case Family::l2_sechexp:
      return "l2-sechexp";
    case Family::custom:
      return "custom";
  }
  return "unknown";
}

void RPhiSDConfig::validate() const {
  require(r >= 1.0 && r <= 2.0, "config: r must lie in [1, 2]");
  require(M >= 1, "config: M must be >= 1");
  feature.validate();
  if (const auto* t = std::get_if<MvtProposal>(&proposal)) {
    require(t->df > 0.0 && t->scale > 0.0, "config: mvt proposal needs df > 0 and c' > 0");
  } else {
    require(std::get<SechProposal>(proposal).kappa > 0.0, "config: sech proposal needs kappa > 0");
  }
}

FeatureSpec RPhiSDConfig::centered_feature(const Vector& mean) const {
  FeatureSpec f = feature;
  f.tilt = f.tilt.centered_at(mean);
  return f;
}

Proposal RPhiSDConfig::make_proposal(const Vector& mean) const {
  return std::visit([&](const auto& p) { return Proposal(p, mean); }, proposal);
}

ImportanceDraws draw_proposal(const Proposal& p, std::size_t m, std::uint64_t seed) {
  ImportanceDraws out;
  out.z = sample(p, m, seed);
  out.log_density.resize(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < out.z.rows(); ++i) {
    const Vector zi = out.z.row(i).transpose();
    out.log_density[i] = p.log_density(as_span(zi));
  }
  return out;
}

Matrix applied_features(const FeatureWorkspace& ws, const Matrix& z) {
  require(static_cast<std::size_t>(z.cols()) == ws.dim(), "applied_features: dimension mismatch");
  Matrix out(static_cast<Eigen::Index>(ws.dim()), z.rows());
  parallel_for(static_cast<std::size_t>(z.rows()), [&](std::size_t m) {
    const auto c = static_cast<Eigen::Index>(m);
    const Vector zm = z.row(c).transpose();
    Matrix scratch;
    ws.applied(as_span(zm), scratch, std::span<double>(out.col(c).data(), ws.dim()));
  });
  return out;
}

namespace {

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double weight(double a, double log_nu, double r) {
  if (a == 0.0) return 0.0;
  return std::exp(r * std::log(std::fabs(a)) - log_nu);
}

}  // namespace

Vector importance_per_dim(const Matrix& applied, const Vector& log_density, double r) {
  require(applied.cols() == log_density.size(), "importance_per_dim: draw count mismatch");
  const Eigen::Index dim = applied.rows();
  const Eigen::Index m = applied.cols();
  Vector out(dim);
  for (Eigen::Index d = 0; d < dim; ++d) {
    CompensatedSum s;
    for (Eigen::Index j = 0; j < m; ++j) s.add(weight(applied(d, j), log_density[j], r));
    out[d] = std::pow(s.value() / static_cast<double>(m), 2.0 / r);
  }
  return out;
}

DiscrepancyResult rphisd(const SampleSet& input, const ScoreModel& model, const RPhiSDConfig& cfg,
                         bool keep_features) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  require(input.dim() == model.dim, "rphisd: sample dimension does not match model");
  const SampleSet sample = canonical_order(input);
  const Proposal proposal = cfg.make_proposal(sample.mean());
  const ImportanceDraws draws = draw_proposal(proposal, cfg.M, cfg.seed);
  const FeatureWorkspace ws(sample, model, cfg.centered_feature(sample.mean()));
  const Matrix applied = applied_features(ws, draws.z);

  DiscrepancyResult res;
  res.per_dim = importance_per_dim(applied, draws.log_density, cfg.r);
  double total = 0.0;
  for (double v : res.per_dim) total += v;
  res.value = std::sqrt(total);
  res.r = cfg.r;
  res.M = cfg.M;
  res.seed = cfg.seed;

  if (keep_features) {
    const std::size_t n = sample.size(), dim = sample.dim(), m = cfg.M;
    Matrix xi(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim * m));
    parallel_for(m, [&](std::size_t j) {
      const auto jc = static_cast<Eigen::Index>(j);
      const Vector zj = draws.z.row(jc).transpose();
      Matrix block;
      ws.stein_block(as_span(zj), block);
      const double scale =
          std::exp(-(std::log(static_cast<double>(m)) + draws.log_density[jc]) / cfg.r);
      for (std::size_t d = 0; d < dim; ++d)
        xi.col(static_cast<Eigen::Index>(d * m + j)) = block.col(static_cast<Eigen::Index>(d)) * scale;
    });
    res.feature_matrix = std::move(xi);
  }
  res.elapsed_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

QuadratureDiscrepancy phisd_quadrature(const SampleSet& input, const ScoreModel& model,
                                       const FeatureSpec& feature, double r,
                                       const QuadratureConfig& quad) {
  require(input.dim() <= 2, "phisd_quadrature: unsupported for dimension > 2");
  require(input.dim() == model.dim, "phisd_quadrature: sample dimension does not match model");
  require(r >= 1.0 && r <= 2.0, "phisd_quadrature: r must lie in [1, 2]");
  const SampleSet sample = canonical_order(input);
  FeatureSpec f = feature;
  f.tilt = f.tilt.centered_at(sample.mean());
  const FeatureWorkspace ws(sample, model, f);
  const std::size_t dim = sample.dim();

  double width = 0.0;
  if (const auto* imq = std::get_if<ImqFeature>(&f.stationary)) {
    width = imq->c;
  } else {
    width = 1.0 / (kSechArgScale * std::get<SechFeature>(f.stationary).scale);
  }
  const Vector& mean = sample.mean();
  double spread = 0.0;
  for (Eigen::Index i = 0; i < sample.points().rows(); ++i)
    spread = std::max(spread, (sample.points().row(i).transpose() - mean).cwiseAbs().maxCoeff());
  const double half_width = spread + 10.0 * width;

  QuadratureDiscrepancy out;
  out.per_dim.resize(static_cast<Eigen::Index>(dim));
  for (std::size_t d = 0; d < dim; ++d) {
    Matrix scratch;
    std::vector<double> z(dim), a(dim);
    auto integrand = [&](double z0, double z1) {
      z[0] = z0;
      if (dim == 2) z[1] = z1;
      ws.applied(z, scratch, a);
      const double v = std::fabs(a[d]);
      return v == 0.0 ? 0.0 : std::pow(v, r);
    };
    QuadratureValue val;
    if (dim == 1) {
      val = integrate_real_line([&](double t) { return integrand(t, 0.0); }, mean[0], half_width,
                                quad);
    } else {
      double inner_err = 0.0;
      val = integrate_real_line(
          [&](double t0) {
            const QuadratureValue inner = integrate_real_line(
                [&](double t1) { return integrand(t0, t1); }, mean[1], half_width, quad);
            inner_err = std::max(inner_err, inner.error);
            return inner.value;
          },
          mean[0], half_width, quad);
      val.error += inner_err;
    }
    out.per_dim[static_cast<Eigen::Index>(d)] = std::pow(val.value, 2.0 / r);
    out.error += val.error;
  }
  double total = 0.0;
  for (double v : out.per_dim) total += v;
  out.value = std::sqrt(total);
  return out;
}

SecondMoments second_moments_from_draws(const FeatureWorkspace& ws, const Matrix& z,
                                        const Vector& log_density, double r, double gamma) {
  require(z.rows() == log_density.size(), "second_moments: draw count mismatch");
  const Matrix applied = applied_features(ws, z);
  const Eigen::Index dim = applied.rows();
  const double m = static_cast<double>(z.rows());
  SecondMoments out{Vector(dim), Vector(dim), Vector(dim)};
  for (Eigen::Index d = 0; d < dim; ++d) {
    CompensatedSum s1, s2;
    for (Eigen::Index j = 0; j < applied.cols(); ++j) {
      const double y = weight(applied(d, j), log_density[j], r);
      s1.add(y);
      s2.add(y * y);
    }
    out.mean[d] = s1.value() / m;
    out.second[d] = s2.value() / m;
    out.ratio_gamma[d] = out.second[d] / std::pow(out.mean[d], 2.0 - gamma);
  }
  return out;
}

SecondMoments second_moment_diagnostic(const SampleSet& input, const ScoreModel& model,
                                       const RPhiSDConfig& cfg, std::size_t n_draws) {
  cfg.validate();
  require(n_draws >= 1000, "second_moment_diagnostic: need at least 1000 draws");
  require(std::isfinite(cfg.gamma) && cfg.gamma >= 0.0, "second_moment_diagnostic: gamma unset");
  const SampleSet sample = canonical_order(input);
  const Proposal proposal = cfg.make_proposal(sample.mean());
  const ImportanceDraws draws = draw_proposal(proposal, n_draws, cfg.seed);
  const FeatureWorkspace ws(sample, model, cfg.centered_feature(sample.mean()));
  return second_moments_from_draws(ws, draws.z, draws.log_density, cfg.r, cfg.gamma);
}

std::size_t concentration_sample_size(double c, double gamma, double eps, double delta, double mean,
                                      std::size_t dims) {
  require(c > 0.0 && eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0 && mean > 0.0,
          "concentration_sample_size: invalid arguments");
  const double m = 2.0 * c * std::log(static_cast<double>(dims) / delta) / (eps * eps) *
                   std::pow(mean, -gamma);
  return static_cast<std::size_t>(std::ceil(m));
}

std::vector<EfficiencyRow> efficiency_experiment(const SampleSet& sample, const ScoreModel& model,
                                                 const std::vector<RPhiSDConfig>& cfg_grid,
                                                 const std::vector<std::size_t>& M_grid,
                                                 const EfficiencyOptions& opts) {
  require(!cfg_grid.empty() && !M_grid.empty(), "efficiency_experiment: empty grid");
  require(opts.trials >= 1, "efficiency_experiment: need at least one trial");
  std::vector<EfficiencyRow> rows;
  for (std::size_t g = 0; g < cfg_grid.size(); ++g) {
    const RPhiSDConfig& base = cfg_grid[g];
    double reference = 0.0;
    std::string kind;
    if (sample.dim() <= 2) {
      reference = phisd_quadrature(sample, model, base.feature, base.r).value;
      kind = "quadrature";
    } else {
      RPhiSDConfig ref = base;
      ref.M = opts.reference_M;
      ref.seed = opts.seed;
      reference = rphisd(sample, model, ref).value;
      kind = "rphisd_M" + std::to_string(opts.reference_M);
    }
    for (std::size_t M : M_grid) {
      std::vector<char> hit(opts.trials, 0);
      parallel_for(opts.trials, [&](std::size_t t) {
        RPhiSDConfig cfg = base;
        cfg.M = M;
        cfg.seed = derive_seed(derive_seed(opts.seed, M), t);
        hit[t] = rphisd(sample, model, cfg).value > reference / 4.0 ? 1 : 0;
      });
      std::size_t count = 0;
      for (char h : hit) count += static_cast<std::size_t>(h);
      EfficiencyRow row;
      row.label = std::string(family_name(base.family));
      row.gamma = base.gamma;
      row.M = M;
      row.trials = opts.trials;
      row.probability = static_cast<double>(count) / static_cast<double>(opts.trials);
      row.reference = reference;
      row.reference_kind = kind;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace rfsd
