#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rfsd/hyper.hpp"
#include "rfsd/kernels.hpp"
#include "rfsd/models.hpp"

namespace rfsd {

struct SgldConfig {
  double step = 0.01;
  std::size_t n_iters = 1000;  // retained iterates
  // Iterates discarded before the retained ones; default is 10% of the whole chain.
  std::optional<std::size_t> burn_in;
  std::size_t minibatch = 30;
  Vector init;  // empty means a standard normal draw
  std::uint64_t seed = 0;

  std::size_t burn_in_iters() const;
  void validate(const ScoreModel& model) const;
};

// x <- x + (step/2) g(x) + N(0, step I), g the minibatch score; no MH correction.
SampleSet run_sgld(const ScoreModel& model, const SgldConfig& cfg);

// Sample-quality measure, smaller is better.
struct QualityMeasure {
  std::string label;
  std::function<double(const SampleSet&, const ScoreModel&, std::uint64_t seed)> eval;
};

// sqrt of the V-statistic KSD^2.
QualityMeasure ksd_measure(std::string label, BaseKernel kernel);
QualityMeasure rphisd_measure(std::string label, ConfigRecipe recipe);

struct SelectionTable {
  std::vector<double> steps;
  std::vector<std::string> measures;
  // values[measure][step][replicate]
  std::vector<std::vector<std::vector<double>>> values;
  // medians[measure][step]
  std::vector<std::vector<double>> medians;
  std::vector<double> selected;  // argmin step per measure
  std::size_t replicates = 0;
};

struct SelectionOptions {
  std::size_t replicates = 5;
  std::uint64_t seed = 0;
};

// Runs one chain per (step, replicate) and scores it with every measure.
SelectionTable select_step_size(const std::vector<double>& step_grid, const ScoreModel& model,
                                const SgldConfig& base, const std::vector<QualityMeasure>& measures,
                                const SelectionOptions& opts = {});

}  // namespace rfsd
