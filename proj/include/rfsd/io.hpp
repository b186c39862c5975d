#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfsd/discrepancy.hpp"
#include "rfsd/goftest.hpp"
#include "rfsd/models.hpp"
#include "rfsd/sgld.hpp"

namespace rfsd {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

// One point per row, comma separated. A first row whose first token is not a
// number is treated as a header.
SampleSet parse_sample_csv(std::istream& in, const std::string& source = "<stream>");
SampleSet read_sample_csv(const std::string& path);
// 17 significant digits, so reading back is exact.
void write_sample_csv(std::ostream& out, const SampleSet& sample);
void write_sample_csv(const std::string& path, const SampleSet& sample);

// Numeric matrix without header; every row must have the same width.
Matrix read_matrix_csv(const std::string& path);

// Model from a name ("gaussian", "gmm", "rbm") or a JSON spec document
// {"kind": ..., "params": {...}}. dim is used when the spec does not fix it.
ScoreModel model_from_spec(const Json& spec, std::size_t dim);
ScoreModel model_from_argument(const std::string& name_or_path, std::size_t dim);

Json to_json(const RPhiSDConfig& cfg);
RPhiSDConfig config_from_json(const Json& j);
Json to_json(const DiscrepancyResult& res);
Json to_json(const GofTestResult& res);
Json to_json(const SelectionTable& table);
Json to_json(const std::vector<PowerRow>& rows);
Json to_json(const std::vector<EfficiencyRow>& rows);

struct RunManifest {
  std::string command;
  Json config = Json::object();
  std::uint64_t seed = 0;
  int threads = 1;
  std::string version = kVersion;
  std::map<std::string, double> timings;

  Json to_json() const;
};

// Writes text to path, or to stdout when path is empty or "-".
void write_text(const std::string& path, const std::string& text);

}  // namespace rfsd
