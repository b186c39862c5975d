#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rfsd/discrepancy.hpp"
#include "rfsd/goftest.hpp"
#include "rfsd/hyper.hpp"
#include "rfsd/io.hpp"
#include "rfsd/kernels.hpp"
#include "rfsd/models.hpp"
#include "rfsd/parallel.hpp"
#include "rfsd/sgld.hpp"
#include "rfsd/simd/dispatch.hpp"

namespace {

using namespace rfsd;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Options shared by every subcommand.
struct CommonArgs {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
  bool timings = false;

  void attach(CLI::App* app) {
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
    app->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--out", out, "Output file (stdout when omitted)");
    app->add_flag("--timings", timings, "Include wall-clock timings in the manifest");
  }
};

// Options that define an estimator configuration.
struct ConfigArgs {
  std::string family = "l1-imq";
  double gamma = 0.25;
  std::size_t M = 10;
  std::optional<double> r, c, beta, df, a, a_prime;
  std::string preset = "gof";
  std::string config_file;

  void attach(CLI::App* app) {
    app->add_option("--family", family, "Estimator family {l1-imq|l2-sechexp}")->capture_default_str();
    app->add_option("--gamma", gamma, "Second-moment exponent")->capture_default_str();
    app->add_option("--M", M, "Proposal draws")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--r", r, "Override the L^r exponent (1 <= r <= 2)");
    app->add_option("--preset", preset, "Hyperparameter preset {gof|sample-quality|rbm}")->capture_default_str();
    app->add_option("--c", c, "IMQ scale (replaces the median heuristic)");
    app->add_option("--beta", beta, "IMQ exponent");
    app->add_option("--df", df, "Proposal degrees of freedom");
    app->add_option("--a", a, "sech scale (replaces the median heuristic)");
    app->add_option("--a-prime", a_prime, "sech_exp tilt strength");
    app->add_option("--config", config_file, "Full configuration JSON (skips derivation)");
  }

  ConfigRecipe recipe(std::uint64_t seed) const {
    ConfigRecipe rc;
    rc.family = parse_family(family);
    rc.gamma = gamma;
    rc.overrides = preset_overrides(parse_preset(preset));
    if (c) rc.overrides.c = *c;
    if (beta) {
      rc.overrides.beta = *beta;
      if (*beta <= -1.0)
        std::cerr << "warning: beta <= -1; convergence control is only guaranteed for beta in (-1, 0)\n";
    }
    if (df) rc.overrides.df = *df;
    if (a) rc.overrides.a = *a;
    if (a_prime) rc.overrides.a_prime = *a_prime;
    if (r) rc.overrides.r = *r;
    rc.overrides.M = M;
    rc.overrides.seed = seed;
    rc.overrides.median_seed = seed;
    return rc;
  }

  RPhiSDConfig build(const SampleSet& sample, std::uint64_t seed) const {
    if (!config_file.empty()) {
      std::ifstream f(config_file);
      require(static_cast<bool>(f), "cannot open '" + config_file + "'");
      RPhiSDConfig cfg = config_from_json(Json::parse(f));
      cfg.seed = seed;
      return cfg;
    }
    return recipe(seed).build(sample);
  }
};

void emit(const CommonArgs& common, const Json& doc) { write_text(common.out, doc.dump(2) + "\n"); }

RunManifest manifest(const std::string& command, const CommonArgs& common) {
  RunManifest m;
  m.command = command;
  m.seed = common.seed;
  m.threads = common.threads;
  return m;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    require(pos == tok.size(), "bad list entry '" + tok + "'");
    out.push_back(v);
  }
  require(!out.empty(), "empty list");
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& s) {
  std::vector<std::size_t> out;
  for (double v : parse_list(s)) {
    require(v >= 1 && v == std::floor(v), "list entries must be positive integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random feature Stein discrepancies: estimators, goodness-of-fit tests, sample quality"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  std::string simd = "auto";
  app.add_option("--simd", simd, "Kernel implementation {auto|scalar|avx2}")->capture_default_str();

  // gof-test
  auto* gof = app.add_subcommand("gof-test", "Goodness-of-fit test of a sample against a model");
  CommonArgs gof_common;
  ConfigArgs gof_cfg;
  std::string gof_sample, gof_model = "gaussian", gof_null_csv, gof_cov_sample;
  double gof_alpha = 0.05;
  std::size_t gof_sims = 4000;
  gof->add_option("--sample", gof_sample, "Sample CSV")->required();
  gof->add_option("--model", gof_model, "Model name or JSON spec file")->capture_default_str();
  gof->add_option("--alpha", gof_alpha, "Test level")->capture_default_str();
  gof->add_option("--n-sims", gof_sims, "Null simulations")->capture_default_str();
  gof->add_option("--null-draws-csv", gof_null_csv, "Write sorted null draws to this CSV");
  gof->add_option("--covariance-sample", gof_cov_sample, "Estimate the null covariance from this P sample");
  gof_common.attach(gof);
  gof_cfg.attach(gof);

  // discrepancy
  auto* disc = app.add_subcommand("discrepancy", "RPhiSD (and optionally KSD) of a sample");
  CommonArgs disc_common;
  ConfigArgs disc_cfg;
  std::string disc_sample, disc_model = "gaussian";
  bool disc_ksd = false;
  double disc_ksd_c = 1.0, disc_ksd_beta = -0.5;
  disc->add_option("--sample", disc_sample, "Sample CSV")->required();
  disc->add_option("--model", disc_model, "Model name or JSON spec file")->capture_default_str();
  disc->add_flag("--ksd", disc_ksd, "Also compute the IMQ KSD");
  disc->add_option("--ksd-c", disc_ksd_c, "KSD IMQ scale")->capture_default_str();
  disc->add_option("--ksd-beta", disc_ksd_beta, "KSD IMQ exponent")->capture_default_str();
  disc_common.attach(disc);
  disc_cfg.attach(disc);

  // config
  auto* conf = app.add_subcommand("config", "Print the derived estimator configuration for a sample");
  CommonArgs conf_common;
  ConfigArgs conf_cfg;
  std::string conf_sample;
  conf->add_option("--sample", conf_sample, "Sample CSV")->required();
  conf_common.attach(conf);
  conf_cfg.attach(conf);

  // sample
  auto* samp = app.add_subcommand("sample", "Draw a sample to CSV");
  CommonArgs samp_common;
  std::string samp_kind = "gaussian";
  std::size_t samp_n = 1000, samp_dim = 1, samp_dh = 40;
  double samp_df = 5.0, samp_sigma_per = 0.0;
  std::uint64_t samp_rbm_seed = 0;
  samp->add_option("--kind", samp_kind, "{gaussian|laplace|student_t|gmm|rbm}")->capture_default_str();
  samp->add_option("--n", samp_n, "Number of points")->capture_default_str();
  samp->add_option("--dim", samp_dim, "Dimension")->capture_default_str();
  samp->add_option("--df", samp_df, "student_t degrees of freedom")->capture_default_str();
  samp->add_option("--dh", samp_dh, "RBM hidden units")->capture_default_str();
  samp->add_option("--rbm-seed", samp_rbm_seed, "Seed of the random RBM parameters")->capture_default_str();
  samp->add_option("--sigma-per", samp_sigma_per, "RBM weight perturbation")->capture_default_str();
  samp_common.attach(samp);

  // sgld
  auto* sg = app.add_subcommand("sgld", "Run an SGLD chain on the mixture posterior and write it as CSV");
  CommonArgs sg_common;
  double sg_step = 0.01;
  std::size_t sg_n = 1000, sg_batch = 30;
  std::uint64_t sg_data_seed = 0;
  sg->add_option("--step", sg_step, "Step size")->capture_default_str();
  sg->add_option("--n", sg_n, "Retained iterates")->capture_default_str();
  sg->add_option("--minibatch", sg_batch, "Minibatch size")->capture_default_str();
  sg->add_option("--data-seed", sg_data_seed, "Seed of the synthetic data set")->capture_default_str();
  sg_common.attach(sg);

  // sample-quality
  auto* sq = app.add_subcommand("sample-quality", "SGLD step-size selection on the mixture posterior");
  CommonArgs sq_common;
  std::string sq_steps = "0.05,0.01,0.005,0.001", sq_Ms = "10,25,75", sq_csv;
  std::size_t sq_n = 1000, sq_batch = 30, sq_reps = 5;
  double sq_gamma = 0.25;
  std::uint64_t sq_data_seed = 0;
  sq->add_option("--steps", sq_steps, "Comma-separated step grid")->capture_default_str();
  sq->add_option("--M", sq_Ms, "Comma-separated proposal draw counts")->capture_default_str();
  sq->add_option("--gamma", sq_gamma, "Second-moment exponent")->capture_default_str();
  sq->add_option("--n", sq_n, "Retained iterates per chain")->capture_default_str();
  sq->add_option("--minibatch", sq_batch, "Minibatch size")->capture_default_str();
  sq->add_option("--replicates", sq_reps, "Chains per step")->capture_default_str();
  sq->add_option("--data-seed", sq_data_seed, "Seed of the synthetic data set")->capture_default_str();
  sq->add_option("--csv", sq_csv, "Also write a long-format CSV table");
  sq_common.attach(sq);

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "Wall-clock of KSD versus RPhiSD over sample sizes");
  CommonArgs bench_common;
  std::string bench_Ns = "500,1000,2000,3000,4000,5000", bench_csv;
  std::size_t bench_dim = 10, bench_M = 10, bench_reps = 3;
  bench->add_option("--N", bench_Ns, "Comma-separated sample sizes")->capture_default_str();
  bench->add_option("--dim", bench_dim, "Dimension")->capture_default_str();
  bench->add_option("--M", bench_M, "Proposal draws")->capture_default_str();
  bench->add_option("--reps", bench_reps, "Timing repetitions (minimum is reported)")->capture_default_str();
  bench->add_option("--csv", bench_csv, "Also write a CSV table");
  bench_common.attach(bench);

  // efficiency
  auto* eff = app.add_subcommand("efficiency", "Pr[RPhiSD > PhiSD/4] over M for each family");
  CommonArgs eff_common;
  std::string eff_sample, eff_model = "gaussian", eff_Ms = "1,2,5,10,20,50", eff_gammas = "0.25", eff_csv;
  std::size_t eff_n = 1000, eff_dim = 1, eff_trials = 100, eff_ref_M = 100000;
  eff->add_option("--sample", eff_sample, "Sample CSV (a Gaussian sample is drawn when omitted)");
  eff->add_option("--model", eff_model, "Model name or JSON spec file")->capture_default_str();
  eff->add_option("--n", eff_n, "Size of the drawn sample")->capture_default_str();
  eff->add_option("--dim", eff_dim, "Dimension of the drawn sample")->capture_default_str();
  eff->add_option("--M", eff_Ms, "Comma-separated proposal draw counts")->capture_default_str();
  eff->add_option("--gamma", eff_gammas, "Comma-separated gamma values")->capture_default_str();
  eff->add_option("--trials", eff_trials, "Trials per cell")->capture_default_str();
  eff->add_option("--reference-M", eff_ref_M, "Draws of the large-M reference (D > 2)")->capture_default_str();
  eff->add_option("--csv", eff_csv, "Also write a CSV table");
  eff_common.attach(eff);

  // power
  auto* pw = app.add_subcommand("power", "Rejection rate of the test against a Gaussian null");
  CommonArgs pw_common;
  ConfigArgs pw_cfg;
  std::string pw_alt = "laplace", pw_csv;
  std::size_t pw_n = 1000, pw_dim = 5, pw_trials = 200, pw_sims = 4000, pw_cal = 200;
  double pw_alpha = 0.05, pw_t_df = 5.0;
  bool pw_no_cal = false;
  pw->add_option("--alternative", pw_alt, "{gaussian|laplace|student_t}")->capture_default_str();
  pw->add_option("--n", pw_n, "Sample size")->capture_default_str();
  pw->add_option("--dim", pw_dim, "Dimension")->capture_default_str();
  pw->add_option("--trials", pw_trials, "Trials")->capture_default_str();
  pw->add_option("--alpha", pw_alpha, "Target level")->capture_default_str();
  pw->add_option("--n-sims", pw_sims, "Null simulations per test")->capture_default_str();
  pw->add_option("--n-cal", pw_cal, "Calibration p-values")->capture_default_str();
  pw->add_option("--t-df", pw_t_df, "student_t degrees of freedom")->capture_default_str();
  pw->add_flag("--no-calibration", pw_no_cal, "Use the target level directly");
  pw->add_option("--csv", pw_csv, "Also write a CSV table");
  pw_common.attach(pw);
  pw_cfg.attach(pw);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (simd == "scalar")
      simd::set_active_level(simd::Level::scalar);
    else if (simd == "avx2")
      simd::set_active_level(simd::Level::avx2);
    else
      require(simd == "auto", "--simd must be auto, scalar or avx2");

    const auto t0 = Clock::now();

    if (*gof) {
      set_num_threads(gof_common.threads);
      const SampleSet s = read_sample_csv(gof_sample);
      const ScoreModel model = model_from_argument(gof_model, s.dim());
      const RPhiSDConfig cfg = gof_cfg.build(s, gof_common.seed);
      GofOptions opts;
      opts.alpha = gof_alpha;
      opts.n_sims = gof_sims;
      opts.keep_null_draws = !gof_null_csv.empty();
      std::optional<SampleSet> cov;
      if (!gof_cov_sample.empty()) {
        cov = read_sample_csv(gof_cov_sample);
        require(cov->dim() == s.dim(), "covariance sample dimension mismatch");
        opts.covariance_sample = &*cov;
      }
      const GofTestResult res = run_test(s, model, cfg, opts);
      if (!gof_null_csv.empty()) {
        Matrix m(static_cast<Eigen::Index>(res.null_draws.size()), 1);
        for (std::size_t i = 0; i < res.null_draws.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = res.null_draws[i];
        write_sample_csv(gof_null_csv, SampleSet(std::move(m)));
      }
      RunManifest man = manifest("gof-test", gof_common);
      man.config = to_json(cfg);
      if (gof_common.timings) man.timings["total"] = seconds_since(t0);
      Json doc = to_json(res);
      doc["manifest"] = man.to_json();
      emit(gof_common, doc);
    } else if (*disc) {
      set_num_threads(disc_common.threads);
      const SampleSet s = read_sample_csv(disc_sample);
      const ScoreModel model = model_from_argument(disc_model, s.dim());
      const RPhiSDConfig cfg = disc_cfg.build(s, disc_common.seed);
      const DiscrepancyResult res = rphisd(s, model, cfg);
      RunManifest man = manifest("discrepancy", disc_common);
      man.config = to_json(cfg);
      if (disc_common.timings) man.timings["rphisd"] = res.elapsed_s;
      Json doc;
      doc["rphisd"] = to_json(res);
      if (disc_ksd) {
        if (disc_ksd_beta <= -1.0)
          std::cerr << "warning: beta <= -1; convergence control is only guaranteed for beta in (-1, 0)\n";
        const auto tk = Clock::now();
        const double k2 = ksd_squared(s, model, BaseKernel::imq(disc_ksd_c, disc_ksd_beta));
        if (disc_common.timings) man.timings["ksd"] = seconds_since(tk);
        doc["ksd"] = {{"value", std::sqrt(std::max(0.0, k2))}, {"squared", k2},
                      {"c", disc_ksd_c}, {"beta", disc_ksd_beta}};
      }
      doc["manifest"] = man.to_json();
      emit(disc_common, doc);
    } else if (*conf) {
      set_num_threads(conf_common.threads);
      const SampleSet s = read_sample_csv(conf_sample);
      emit(conf_common, to_json(conf_cfg.build(s, conf_common.seed)));
    } else if (*samp) {
      AlternativeParams p;
      p.dim = samp_dim;
      p.df = samp_df;
      std::string kind = samp_kind;
      if (kind == "laplace") kind = "laplace_product";
      if (kind == "rbm" || kind == "rbm_gibbs") {
        p.rbm = random_rbm(samp_dim, samp_dh, samp_rbm_seed);
        if (samp_sigma_per > 0.0) p.rbm = perturb_rbm(p.rbm, samp_sigma_per, derive_seed(samp_rbm_seed, 1));
      }
      const SampleSet s = sample_alternative(parse_alternative_kind(kind), p, samp_n, samp_common.seed);
      std::ostringstream os;
      write_sample_csv(os, s);
      write_text(samp_common.out, os.str());
    } else if (*sg) {
      GmmHyperparams hp;
      const ScoreModel model = gmm_posterior_model(gmm_generate_data(hp, sg_data_seed), hp);
      SgldConfig c;
      c.step = sg_step;
      c.n_iters = sg_n;
      c.minibatch = sg_batch;
      c.seed = sg_common.seed;
      std::ostringstream os;
      write_sample_csv(os, run_sgld(model, c));
      write_text(sg_common.out, os.str());
    } else if (*sq) {
      set_num_threads(sq_common.threads);
      GmmHyperparams hp;
      const ScoreModel model = gmm_posterior_model(gmm_generate_data(hp, sq_data_seed), hp);
      SgldConfig base;
      base.n_iters = sq_n;
      base.minibatch = sq_batch;
      std::vector<QualityMeasure> measures;
      measures.push_back(ksd_measure("imq-ksd", BaseKernel::imq(1.0, -0.5)));
      for (std::size_t M : parse_size_list(sq_Ms)) {
        for (Family fam : {Family::l1_imq, Family::l2_sechexp}) {
          ConfigRecipe rc;
          rc.family = fam;
          rc.gamma = sq_gamma;
          rc.overrides = preset_overrides(Preset::sample_quality);
          rc.overrides.M = M;
          measures.push_back(rphisd_measure(std::string(family_name(fam)) + "-M" + std::to_string(M), rc));
        }
      }
      SelectionOptions so;
      so.replicates = sq_reps;
      so.seed = sq_common.seed;
      const SelectionTable table = select_step_size(parse_list(sq_steps), model, base, measures, so);
      if (!sq_csv.empty()) {
        std::ostringstream os;
        os << "measure,step,replicate,value,median\n";
        for (std::size_t k = 0; k < table.measures.size(); ++k)
          for (std::size_t i = 0; i < table.steps.size(); ++i)
            for (std::size_t r = 0; r < table.replicates; ++r)
              os << table.measures[k] << ',' << table.steps[i] << ',' << r << ','
                 << Json(table.values[k][i][r]).dump() << ',' << Json(table.medians[k][i]).dump() << '\n';
        write_text(sq_csv, os.str());
      }
      RunManifest man = manifest("sample-quality", sq_common);
      man.config = {{"steps", table.steps}, {"n", sq_n}, {"minibatch", sq_batch},
                    {"replicates", sq_reps}, {"gamma", sq_gamma}, {"data_seed", sq_data_seed}};
      if (sq_common.timings) man.timings["total"] = seconds_since(t0);
      Json doc = to_json(table);
      doc["manifest"] = man.to_json();
      emit(sq_common, doc);
    } else if (*bench) {
      set_num_threads(bench_common.threads);
      const std::vector<std::size_t> Ns = parse_size_list(bench_Ns);
      const ScoreModel model = gaussian_model(bench_dim);
      AlternativeParams p;
      p.dim = bench_dim;
      std::vector<double> xs, t_ksd, t_rphisd;
      Json rows = Json::array();
      std::ostringstream csv;
      csv << "N,ksd_s,rphisd_s,ratio\n";
      for (std::size_t N : Ns) {
        const SampleSet s = sample_alternative(AlternativeKind::gaussian, p, N, derive_seed(bench_common.seed, N));
        ConfigRecipe rc;
        rc.overrides.M = bench_M;
        const RPhiSDConfig cfg = rc.build(s, bench_common.seed);
        double best_k = 1e300, best_r = 1e300;
        for (std::size_t rep = 0; rep < bench_reps; ++rep) {
          auto tk = Clock::now();
          volatile double k2 = ksd_squared(s, model, BaseKernel::imq(1.0, -0.5));
          (void)k2;
          best_k = std::min(best_k, seconds_since(tk));
          auto tr = Clock::now();
          volatile double v = rphisd(s, model, cfg).value;
          (void)v;
          best_r = std::min(best_r, seconds_since(tr));
        }
        xs.push_back(static_cast<double>(N));
        t_ksd.push_back(best_k);
        t_rphisd.push_back(best_r);
        rows.push_back({{"N", N}, {"ksd_s", best_k}, {"rphisd_s", best_r}, {"ratio", best_k / best_r}});
        csv << N << ',' << best_k << ',' << best_r << ',' << best_k / best_r << '\n';
      }
      if (!bench_csv.empty()) write_text(bench_csv, csv.str());
      RunManifest man = manifest("benchmark", bench_common);
      man.config = {{"dim", bench_dim}, {"M", bench_M}, {"reps", bench_reps},
                    {"simd", std::string(simd::level_name(simd::active_level()))}};
      man.timings["total"] = seconds_since(t0);
      Json doc = {{"rows", rows}};
      if (xs.size() >= 2)
        doc["loglog_slope"] = {{"ksd", loglog_slope(xs, t_ksd)}, {"rphisd", loglog_slope(xs, t_rphisd)}};
      doc["manifest"] = man.to_json();
      emit(bench_common, doc);
    } else if (*eff) {
      set_num_threads(eff_common.threads);
      SampleSet s;
      if (eff_sample.empty()) {
        AlternativeParams p;
        p.dim = eff_dim;
        s = sample_alternative(AlternativeKind::gaussian, p, eff_n, eff_common.seed);
      } else {
        s = read_sample_csv(eff_sample);
      }
      const ScoreModel model = model_from_argument(eff_model, s.dim());
      std::vector<RPhiSDConfig> grid;
      for (double g : parse_list(eff_gammas))
        for (Family fam : {Family::l1_imq, Family::l2_sechexp}) {
          ConfigRecipe rc;
          rc.family = fam;
          rc.gamma = g;
          grid.push_back(rc.build(s, eff_common.seed));
        }
      EfficiencyOptions eo;
      eo.trials = eff_trials;
      eo.seed = eff_common.seed;
      eo.reference_M = eff_ref_M;
      const auto rows = efficiency_experiment(s, model, grid, parse_size_list(eff_Ms), eo);
      if (!eff_csv.empty()) {
        std::ostringstream os;
        os << "label,gamma,M,probability,trials,reference,reference_kind\n";
        for (const auto& r : rows)
          os << r.label << ',' << r.gamma << ',' << r.M << ',' << r.probability << ',' << r.trials << ','
             << Json(r.reference).dump() << ',' << r.reference_kind << '\n';
        write_text(eff_csv, os.str());
      }
      RunManifest man = manifest("efficiency", eff_common);
      man.config = {{"n", s.size()}, {"dim", s.dim()}, {"trials", eff_trials}};
      if (eff_common.timings) man.timings["total"] = seconds_since(t0);
      Json doc = {{"rows", to_json(rows)}, {"manifest", man.to_json()}};
      emit(eff_common, doc);
    } else if (*pw) {
      set_num_threads(pw_common.threads);
      const ScoreModel model = gaussian_model(pw_dim);
      AlternativeParams p;
      p.dim = pw_dim;
      p.df = pw_t_df;
      std::string alt = pw_alt == "laplace" ? "laplace_product" : pw_alt;
      const AlternativeKind alt_kind = parse_alternative_kind(alt);
      SampleGenerator null_gen = [p](std::size_t n, std::uint64_t seed) {
        return sample_alternative(AlternativeKind::gaussian, p, n, seed);
      };
      SampleGenerator alt_gen = [p, alt_kind](std::size_t n, std::uint64_t seed) {
        return sample_alternative(alt_kind, p, n, seed);
      };
      PowerOptions po;
      po.n = pw_n;
      po.trials = pw_trials;
      po.alpha = pw_alpha;
      po.n_sims = pw_sims;
      po.n_cal = pw_cal;
      po.calibrate = !pw_no_cal;
      po.seed = pw_common.seed;
      const auto rows = power_experiment(model, null_gen, alt_gen,
                                         {{pw_cfg.family, pw_cfg.recipe(pw_common.seed)}}, po);
      if (!pw_csv.empty()) {
        std::ostringstream os;
        os << "label,level,rejections,trials,rate,std_error\n";
        for (const auto& r : rows)
          os << r.label << ',' << r.level << ',' << r.rejections << ',' << r.trials << ',' << r.rate << ','
             << r.std_error << '\n';
        write_text(pw_csv, os.str());
      }
      RunManifest man = manifest("power", pw_common);
      man.config = {{"alternative", alt}, {"n", pw_n}, {"dim", pw_dim}, {"family", pw_cfg.family},
                    {"gamma", pw_cfg.gamma}, {"M", pw_cfg.M}};
      if (pw_common.timings) man.timings["total"] = seconds_since(t0);
      Json doc = {{"rows", to_json(rows)}, {"manifest", man.to_json()}};
      emit(pw_common, doc);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
