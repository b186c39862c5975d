#include "rfsd/sgld.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rfsd/discrepancy.hpp"
#include "rfsd/parallel.hpp"
#include "rfsd/random.hpp"

namespace rfsd {

std::size_t SgldConfig::burn_in_iters() const {
  if (burn_in) return *burn_in;
  return (n_iters + 8) / 9;
}

void SgldConfig::validate(const ScoreModel& model) const {
  require(std::isfinite(step) && step > 0.0, "sgld: step must be positive");
  require(n_iters >= 1, "sgld: n_iters must be positive");
  require(minibatch >= 1, "sgld: minibatch must be positive");
  require(init.size() == 0 || static_cast<std::size_t>(init.size()) == model.dim,
          "sgld: init dimension does not match the model");
  if (model.stochastic_score)
    require(minibatch <= model.data_size, "sgld: minibatch exceeds the dataset size");
  else
    require(static_cast<bool>(model.score), "sgld: model has no score");
}

SampleSet run_sgld(const ScoreModel& model, const SgldConfig& cfg) {
  cfg.validate(model);
  const std::size_t dim = model.dim;
  Rng rng = make_rng(cfg.seed);
  std::normal_distribution<double> normal;

  Vector x(dim);
  if (cfg.init.size() == 0)
    for (auto& v : x) v = normal(rng);
  else
    x = cfg.init;

  const bool stochastic = static_cast<bool>(model.stochastic_score);
  std::vector<std::size_t> indices(stochastic ? model.data_size : 0);
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  std::vector<std::size_t> batch(stochastic ? cfg.minibatch : 0);

  const double half_step = 0.5 * cfg.step;
  const double noise_sd = std::sqrt(cfg.step);
  const std::size_t burn = cfg.burn_in_iters();
  const std::size_t total = burn + cfg.n_iters;
  Matrix chain(static_cast<Eigen::Index>(cfg.n_iters), static_cast<Eigen::Index>(dim));
  Vector g(dim);

  for (std::size_t it = 0; it < total; ++it) {
    if (stochastic) {
      // Partial Fisher-Yates: the first minibatch slots become a uniform subset.
      for (std::size_t k = 0; k < cfg.minibatch; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, indices.size() - 1);
        std::swap(indices[k], indices[pick(rng)]);
        batch[k] = indices[k];
      }
      model.stochastic_score(as_span(x), batch, as_span(g));
    } else {
      model.score(as_span(x), as_span(g));
    }
    for (std::size_t d = 0; d < dim; ++d)
      x[static_cast<Eigen::Index>(d)] += half_step * g[static_cast<Eigen::Index>(d)] + noise_sd * normal(rng);
    if (it >= burn) chain.row(static_cast<Eigen::Index>(it - burn)) = x.transpose();
  }
  require(chain.allFinite(), "sgld: chain diverged");
  return SampleSet(std::move(chain));
}

QualityMeasure ksd_measure(std::string label, BaseKernel kernel) {
  kernel.validate();
  return {std::move(label), [kernel](const SampleSet& s, const ScoreModel& m, std::uint64_t) {
            return std::sqrt(std::max(0.0, ksd_squared(s, m, kernel)));
          }};
}

QualityMeasure rphisd_measure(std::string label, ConfigRecipe recipe) {
  return {std::move(label), [recipe](const SampleSet& s, const ScoreModel& m, std::uint64_t seed) {
            return rphisd(s, m, recipe.build(s, seed)).value;
          }};
}

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

SelectionTable select_step_size(const std::vector<double>& step_grid, const ScoreModel& model,
                                const SgldConfig& base, const std::vector<QualityMeasure>& measures,
                                const SelectionOptions& opts) {
  require(!step_grid.empty(), "select_step_size: step grid is empty");
  require(!measures.empty(), "select_step_size: no quality measures");
  require(opts.replicates >= 1, "select_step_size: need at least one replicate");

  const std::size_t n_steps = step_grid.size();
  const std::size_t reps = opts.replicates;
  SelectionTable table;
  table.steps = step_grid;
  table.replicates = reps;
  for (const auto& m : measures) table.measures.push_back(m.label);
  table.values.assign(measures.size(),
                      std::vector<std::vector<double>>(n_steps, std::vector<double>(reps, 0.0)));

  parallel_for(n_steps * reps, [&](std::size_t job) {
    const std::size_t s = job / reps;
    const std::size_t rep = job % reps;
    // The chain seed depends only on the replicate, so steps share noise.
    SgldConfig cfg = base;
    cfg.step = step_grid[s];
    cfg.seed = derive_seed(opts.seed, rep);
    const SampleSet chain = run_sgld(model, cfg);
    for (std::size_t k = 0; k < measures.size(); ++k)
      table.values[k][s][rep] =
          measures[k].eval(chain, model, derive_seed(derive_seed(opts.seed, 0x5e1ec7), rep));
  });

  table.medians.assign(measures.size(), std::vector<double>(n_steps, 0.0));
  for (std::size_t k = 0; k < measures.size(); ++k) {
    std::size_t best = 0;
    for (std::size_t s = 0; s < n_steps; ++s) {
      table.medians[k][s] = median_of(table.values[k][s]);
      if (table.medians[k][s] < table.medians[k][best]) best = s;
    }
    table.selected.push_back(step_grid[best]);
  }
  return table;
}

}  // namespace rfsd
