#include "rfsd/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace rfsd {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_double(const std::string& tok, double& out) {
  if (tok.empty()) return false;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

Matrix parse_rows(std::istream& in, const std::string& source, bool allow_header) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> toks = split_commas(line);
    std::vector<double> vals(toks.size());
    bool ok = true;
    for (std::size_t k = 0; k < toks.size() && ok; ++k) ok = parse_double(toks[k], vals[k]);
    if (!ok) {
      double dummy;
      if (allow_header && rows.empty() && width == 0 && !parse_double(toks[0], dummy)) {
        width = toks.size();
        continue;
      }
      throw Error(source + ":" + std::to_string(line_no) + ": malformed numeric row");
    }
    if (width == 0) width = vals.size();
    if (vals.size() != width)
      throw Error(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(width) +
                  " columns, found " + std::to_string(vals.size()));
    for (double v : vals)
      if (!std::isfinite(v)) throw Error(source + ":" + std::to_string(line_no) + ": non-finite value");
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw Error(source + ": no data rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t d = 0; d < width; ++d)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = rows[i][d];
  return m;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open '" + path + "'");
  return f;
}

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

double number_or_nan(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.at(key).get<double>();
}

// NaN is not valid JSON; unset parameters become null.
Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

SampleSet parse_sample_csv(std::istream& in, const std::string& source) {
  return SampleSet(parse_rows(in, source, true));
}

SampleSet read_sample_csv(const std::string& path) {
  std::ifstream f = open_input(path);
  return parse_sample_csv(f, path);
}

void write_sample_csv(std::ostream& out, const SampleSet& sample) {
  const Matrix& p = sample.points();
  char buf[32];
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index d = 0; d < p.cols(); ++d) {
      std::snprintf(buf, sizeof buf, "%.17g", p(i, d));
      if (d > 0) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

void write_sample_csv(const std::string& path, const SampleSet& sample) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path + "'");
  write_sample_csv(f, sample);
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream f = open_input(path);
  return parse_rows(f, path, false);
}

ScoreModel model_from_spec(const Json& spec, std::size_t dim) {
  std::string kind;
  Json params = Json::object();
  if (spec.is_string()) {
    kind = spec.get<std::string>();
  } else {
    require(spec.is_object() && spec.contains("kind"), "model spec needs a \"kind\" field");
    kind = spec.at("kind").get<std::string>();
    if (spec.contains("params")) params = spec.at("params");
  }
  const auto get_size = [&](const char* key, std::size_t fallback) {
    return params.contains(key) ? params.at(key).get<std::size_t>() : fallback;
  };
  const auto get_double = [&](const char* key, double fallback) {
    return params.contains(key) ? params.at(key).get<double>() : fallback;
  };

  if (kind == "gaussian") {
    const std::size_t d = get_size("dim", dim);
    require(d == dim, "model dimension " + std::to_string(d) + " does not match sample dimension " +
                          std::to_string(dim));
    return gaussian_model(d);
  }
  if (kind == "gmm") {
    require(dim == 2, "gmm posterior model is two-dimensional");
    GmmHyperparams hp;
    hp.sigma1_sq = get_double("sigma1_sq", hp.sigma1_sq);
    hp.sigma2_sq = get_double("sigma2_sq", hp.sigma2_sq);
    hp.sigmax_sq = get_double("sigmax_sq", hp.sigmax_sq);
    hp.weight = get_double("weight", hp.weight);
    hp.theta1_true = get_double("theta1", hp.theta1_true);
    hp.theta2_true = get_double("theta2", hp.theta2_true);
    hp.n_data = get_size("n_data", hp.n_data);
    std::vector<double> data;
    if (params.contains("data"))
      data = params.at("data").get<std::vector<double>>();
    else
      data = gmm_generate_data(hp, params.value("data_seed", std::uint64_t{0}));
    return gmm_posterior_model(std::move(data), hp);
  }
  if (kind == "rbm") {
    RbmParams p;
    if (params.contains("B_csv")) {
      p.B = read_matrix_csv(params.at("B_csv").get<std::string>());
      const Matrix b = read_matrix_csv(params.at("b_csv").get<std::string>());
      const Matrix c = read_matrix_csv(params.at("c_csv").get<std::string>());
      p.b = Eigen::Map<const Vector>(b.data(), b.size());
      p.c = Eigen::Map<const Vector>(c.data(), c.size());
    } else {
      p = random_rbm(get_size("dx", dim), get_size("dh", 40), params.value("seed", std::uint64_t{0}));
    }
    const double sigma_per = get_double("sigma_per", 0.0);
    if (sigma_per > 0.0) p = perturb_rbm(p, sigma_per, params.value("perturb_seed", std::uint64_t{1}));
    require(static_cast<std::size_t>(p.B.rows()) == dim,
            "rbm visible dimension does not match sample dimension");
    return rbm_model(p);
  }
  throw Error("unknown model kind '" + kind + "'");
}

ScoreModel model_from_argument(const std::string& name_or_path, std::size_t dim) {
  if (name_or_path == "gaussian" || name_or_path == "gmm" || name_or_path == "rbm")
    return model_from_spec(Json(name_or_path), dim);
  std::ifstream f = open_input(name_or_path);
  Json spec;
  try {
    spec = Json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw Error(name_or_path + ": invalid model spec: " + e.what());
  }
  return model_from_spec(spec, dim);
}

Json to_json(const RPhiSDConfig& cfg) {
  Json j;
  j["family"] = std::string(family_name(cfg.family));
  j["gamma"] = num(cfg.gamma);
  j["alpha"] = num(cfg.alpha);
  j["lambda_bar"] = num(cfg.lambda_bar);
  j["xi"] = num(cfg.xi);
  j["xi_under"] = num(cfg.xi_under);
  j["r"] = cfg.r;
  j["M"] = cfg.M;
  j["seed"] = cfg.seed;
  j["kernel"] = {{"c", num(cfg.kernel.c)},         {"beta", num(cfg.kernel.beta)},
                 {"df", num(cfg.kernel.df)},       {"a", num(cfg.kernel.a)},
                 {"a_prime", num(cfg.kernel.a_prime)}, {"median", num(cfg.kernel.median)}};
  Json feat;
  if (const auto* imq = std::get_if<ImqFeature>(&cfg.feature.stationary))
    feat = {{"kind", "imq"}, {"c", imq->c}, {"beta", imq->beta}};
  else
    feat = {{"kind", "sech"}, {"scale", std::get<SechFeature>(cfg.feature.stationary).scale}};
  if (cfg.feature.tilt.kind == TiltFunction::Kind::sech_exp)
    feat["tilt"] = {{"kind", "sech_exp"}, {"a_prime", cfg.feature.tilt.a_prime}};
  else
    feat["tilt"] = {{"kind", "unit"}};
  j["feature"] = feat;
  if (const auto* mvt = std::get_if<MvtProposal>(&cfg.proposal))
    j["proposal"] = {{"kind", "mvt"}, {"df", mvt->df}, {"scale", mvt->scale}};
  else
    j["proposal"] = {{"kind", "sech"}, {"kappa", std::get<SechProposal>(cfg.proposal).kappa}};
  return j;
}

RPhiSDConfig config_from_json(const Json& j) {
  try {
    RPhiSDConfig cfg;
    cfg.family = parse_family(j.at("family").get<std::string>());
    cfg.gamma = number_or_nan(j, "gamma");
    cfg.alpha = number_or_nan(j, "alpha");
    cfg.lambda_bar = number_or_nan(j, "lambda_bar");
    cfg.xi = number_or_nan(j, "xi");
    cfg.xi_under = number_or_nan(j, "xi_under");
    cfg.r = j.at("r").get<double>();
    cfg.M = j.at("M").get<std::size_t>();
    cfg.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("kernel")) {
      const Json& k = j.at("kernel");
      cfg.kernel = {number_or_nan(k, "c"),       number_or_nan(k, "beta"),
                    number_or_nan(k, "df"),      number_or_nan(k, "a"),
                    number_or_nan(k, "a_prime"), number_or_nan(k, "median")};
    }
    const Json& f = j.at("feature");
    if (f.at("kind") == "imq")
      cfg.feature.stationary = ImqFeature{f.at("c").get<double>(), f.at("beta").get<double>()};
    else if (f.at("kind") == "sech")
      cfg.feature.stationary = SechFeature{f.at("scale").get<double>()};
    else
      throw Error("unknown feature kind");
    if (f.contains("tilt") && f.at("tilt").at("kind") == "sech_exp")
      cfg.feature.tilt = TiltFunction::sech_exp(f.at("tilt").at("a_prime").get<double>());
    const Json& p = j.at("proposal");
    if (p.at("kind") == "mvt")
      cfg.proposal = MvtProposal{p.at("df").get<double>(), p.at("scale").get<double>()};
    else if (p.at("kind") == "sech")
      cfg.proposal = SechProposal{p.at("kappa").get<double>()};
    else
      throw Error("unknown proposal kind");
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid config JSON: ") + e.what());
  }
}

Json to_json(const DiscrepancyResult& res) {
  return {{"value", res.value},   {"squared", res.value * res.value},
          {"per_dim", vector_json(res.per_dim)},
          {"r", res.r},           {"M", res.M},
          {"seed", res.seed}};
}

Json to_json(const GofTestResult& res) {
  return {{"statistic", res.statistic},     {"threshold", res.threshold},
          {"p_value", res.p_value},         {"reject", res.reject},
          {"alpha", res.alpha_nominal},     {"n_sims", res.n_null_sims},
          {"seed", res.seed}};
}

Json to_json(const SelectionTable& table) {
  Json j;
  j["steps"] = table.steps;
  j["replicates"] = table.replicates;
  Json measures = Json::array();
  for (std::size_t k = 0; k < table.measures.size(); ++k)
    measures.push_back({{"label", table.measures[k]},
                        {"medians", table.medians[k]},
                        {"values", table.values[k]},
                        {"selected_step", table.selected[k]}});
  j["measures"] = measures;
  return j;
}

Json to_json(const std::vector<PowerRow>& rows) {
  Json a = Json::array();
  for (const auto& r : rows)
    a.push_back({{"label", r.label},         {"level", r.level},
                 {"rejections", r.rejections}, {"trials", r.trials},
                 {"rate", r.rate},           {"std_error", r.std_error}});
  return a;
}

Json to_json(const std::vector<EfficiencyRow>& rows) {
  Json a = Json::array();
  for (const auto& r : rows)
    a.push_back({{"label", r.label},         {"gamma", num(r.gamma)},
                 {"M", r.M},                 {"probability", r.probability},
                 {"trials", r.trials},       {"reference", r.reference},
                 {"reference_kind", r.reference_kind}});
  return a;
}

Json RunManifest::to_json() const {
  Json j = {{"command", command}, {"config", config}, {"seed", seed},
            {"threads", threads}, {"version", version}};
  if (!timings.empty()) {
    Json t = Json::object();
    for (const auto& [k, v] : timings) t[k] = v;
    j["timings_s"] = t;
  }
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path + "'");
  f << text;
}

}  // namespace rfsd
