// Command-line front end: configure an instance, run a solver experiment,
// emit CSV/JSON, compute class norms, or run the verification suites.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric error,
// 4 verification failure.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "schwarz/config.hpp"
#include "schwarz/harness.hpp"

namespace {

using namespace schwarz;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitVerify = 4;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out << text;
}

int cmd_run(const RunConfig& config) {
  const BuiltSetup setup = build_setup(config);
  const SolverSpec spec = solver_spec_from(config.solver);
  const Problem problem = setup.instance.problem(setup.target);

  const ExpectationCurve mc =
      mc_expectation(problem, setup.instance.measure, spec, config.m_max, config.runs,
                     *config.seed, config.threads);

  BoundReport report;
  report.suite = "run";
  report.instance = setup.description;
  report.seed = *config.seed;
  report.runs = config.runs;
  report.low_power = config.runs < 30;

  // Exact enumeration when the sequence tree fits the budget.
  std::map<std::string, std::vector<double>> columns;
  if (spec.variant != SolverVariant::noisy || spec.noise.sigma == 0.0) {
    try {
      const ExpectationCurve exact =
          enumerate_expectation(problem, setup.instance.measure, spec, config.m_max);
      double worst = 0.0;
      bool ok = true;
      for (std::size_t m = 0; m < mc.means.size(); ++m) {
        const double gap = std::abs(mc.means[m] - exact.means[m]);
        const double se = mc.stderrs[m];
        if (se > 0.0) {
          worst = std::max(worst, gap / se);
          ok = ok && gap <= 4.0 * se;
        } else {
          ok = ok && gap <= 1e-12;
        }
      }
      BoundCheck check;
      check.name = "enumeration-agreement";
      check.satisfied = ok;
      check.worst_margin_sigma = worst;
      check.note = "exact oracle within 4 sigma";
      report.checks.push_back(std::move(check));
    } catch (const std::invalid_argument&) {
      // Tree too large (or variant not enumerable): oracle column stays absent.
    }
  }

  // Bound curves from whatever norms the instance supports.
  BoundInputs inputs;
  inputs.lambda = setup.instance.family->lambda();
  inputs.beta = spec.beta;
  inputs.norm_u = setup.instance.family->space().norm(setup.target);
  try {
    inputs.a2 = a2_norm(*setup.instance.family, setup.instance.measure, setup.target);
  } catch (const std::invalid_argument&) {
  }
  if (setup.instance.orthonormal_atoms) {
    inputs.a1 = aq_gamma_norm(*setup.instance.family, setup.target, LqExponent::one,
                              Vector::Ones(setup.instance.family->size()));
  }
  if (setup.decomp) {
    inputs.decomp = &*setup.decomp;
    inputs.u = &setup.target;
    try {
      inputs.hs[0.5] = hs_norm(setup.target, 0.5, *setup.decomp);
      if (config.target.kind == "hs_element" && config.target.s < 0.5 && config.target.s > 0.0) {
        inputs.hs[config.target.s] = hs_norm(setup.target, config.target.s, *setup.decomp);
      }
    } catch (const std::invalid_argument&) {
    }
  }
  for (auto& check : bound_curves(inputs, config.m_max)) {
    if (check.skipped) continue;
    evaluate_check(check, mc);
    if (check.name == "ec2") columns["bound_ec2"] = check.values;
    if (check.name == "ec2a") columns["bound_ec2a"] = check.values;
    if (check.name == "cg1") columns["bound_cg1"] = check.values;
    if (check.name.rfind("ecvr", 0) == 0) columns["bound_ecvr"] = check.values;
    report.checks.push_back(std::move(check));
  }
  if (setup.instance.orthonormal_atoms) {
    columns["lower_bound"] = lower_bound_curve(setup.instance, setup.target, config.m_max);
  }

  std::ostringstream csv;
  write_curve_csv(csv, mc, columns);
  if (!config.csv_path.empty()) {
    write_text_file(config.csv_path, csv.str());
  } else {
    std::cout << csv.str();
  }
  const std::string json_text = report_to_json(report);
  if (!config.json_path.empty()) {
    write_text_file(config.json_path, json_text + "\n");
  } else if (!config.csv_path.empty()) {
    std::cout << json_text << "\n";
  }
  return kExitOk;
}

int print_reports(const std::vector<BoundReport>& reports) {
  bool all_ok = true;
  for (const auto& report : reports) {
    std::cout << "suite " << report.suite << "  [" << report.instance << "]";
    if (report.runs > 0) std::cout << "  runs=" << report.runs;
    if (report.low_power) std::cout << "  (low power)";
    std::cout << "\n";
    for (const auto& check : report.checks) {
      const char* verdict = check.skipped ? "SKIP" : (check.satisfied ? "PASS" : "FAIL");
      std::cout << "  " << verdict << "  " << check.name;
      if (!check.note.empty()) std::cout << "  -- " << check.note;
      std::cout << "\n";
    }
    all_ok = all_ok && report.all_satisfied();
  }
  return all_ok ? kExitOk : kExitVerify;
}

int cmd_verify(const std::string& suite, const VerifyConfig& config, const std::string& json_path) {
  const std::vector<BoundReport> reports = verify(suite, config);
  const int rc = print_reports(reports);
  if (!json_path.empty()) {
    std::string text = "[\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
      text += report_to_json(reports[i]);
      if (i + 1 < reports.size()) text += ",";
      text += "\n";
    }
    text += "]\n";
    write_text_file(json_path, text);
  }
  return rc;
}

int cmd_norms(const RunConfig& config, const std::vector<double>& s_list,
              const std::string& out_path) {
  const BuiltSetup setup = build_setup(config);
  const Vector& u = setup.target;
  const SubspaceFamily& family = *setup.instance.family;

  SmoothnessClassReport norms;
  try {
    norms.a2 = a2_norm(family, setup.instance.measure, u);
  } catch (const std::invalid_argument&) {
  }
  if (setup.instance.orthonormal_atoms) {
    norms.a1_upper = aq_gamma_norm(family, u, LqExponent::one, Vector::Ones(family.size()));
    norms.ainf_rho = aq_gamma_norm(family, u, LqExponent::inf, setup.instance.measure.weights());
  }
  if (setup.decomp) {
    for (double s : s_list) {
      try {
        norms.hs[s] = hs_norm(u, s, *setup.decomp);
      } catch (const std::invalid_argument&) {
      }
    }
  }

  nlohmann::json j;
  j["instance"] = setup.description;
  j["norm"] = family.space().norm(u);
  if (norms.a2) j["a2"] = *norms.a2;
  if (norms.a1_upper) j["a1_upper"] = *norms.a1_upper;
  if (norms.ainf_rho) j["ainf_rho"] = *norms.ainf_rho;
  nlohmann::json hs = nlohmann::json::object();
  for (const auto& [s, v] : norms.hs) hs[format_double(s)] = v;
  j["hs"] = std::move(hs);
  const std::string text = j.dump(2) + "\n";
  if (!out_path.empty()) {
    write_text_file(out_path, text);
  } else {
    std::cout << text;
  }
  return kExitOk;
}

int cmd_sweep(const RunConfig& base, const std::vector<double>& s_values,
              const std::vector<double>& beta_values, const std::vector<double>& sigma_values,
              const std::vector<double>& ratio_values, const std::string& out_path) {
  std::ostringstream csv;
  csv << "s,beta,sigma,ratio,variant,m_max,runs,slope,worst_margin_sigma,satisfied\n";
  auto one = [&](double s, double beta, double sigma, double ratio) {
    RunConfig config = base;
    config.target.s = s;
    config.solver.beta = beta;
    config.solver.sigma = sigma;
    if (sigma > 0.0) config.solver.variant = "noisy";
    if (config.instance.weights.kind == "geometric") config.instance.weights.ratio = ratio;

    const BuiltSetup setup = build_setup(config);
    const SolverSpec spec = solver_spec_from(config.solver);
    const Problem problem = setup.instance.problem(setup.target);
    const ExpectationCurve mc =
        mc_expectation(problem, setup.instance.measure, spec, config.m_max, config.runs,
                       *config.seed, config.threads);

    const int lo = std::max(2, config.m_max / 8);
    double slope = 0.0;
    try {
      slope = rate_fit(mc.means, lo, config.m_max).slope;
    } catch (const std::exception&) {
      slope = std::numeric_limits<double>::quiet_NaN();
    }

    BoundInputs inputs;
    inputs.lambda = setup.instance.family->lambda();
    inputs.beta = beta;
    inputs.norm_u = setup.instance.family->space().norm(setup.target);
    try {
      inputs.a2 = a2_norm(*setup.instance.family, setup.instance.measure, setup.target);
    } catch (const std::invalid_argument&) {
    }
    double worst = -std::numeric_limits<double>::infinity();
    bool satisfied = true;
    for (auto& check : bound_curves(inputs, config.m_max)) {
      if (check.skipped || check.name != "ec2") continue;
      evaluate_check(check, mc);
      worst = check.worst_margin_sigma;
      satisfied = check.satisfied;
    }
    csv << format_double(s) << ',' << format_double(beta) << ',' << format_double(sigma) << ','
        << format_double(ratio) << ',' << config.solver.variant << ',' << config.m_max << ','
        << config.runs << ',' << format_double(slope) << ',' << format_double(worst) << ','
        << (satisfied ? 1 : 0) << '\n';
  };
  for (double s : s_values) {
    for (double beta : beta_values) {
      for (double sigma : sigma_values) {
        for (double ratio : ratio_values) {
          one(s, beta, sigma, ratio);
        }
      }
    }
  }
  if (!out_path.empty()) {
    write_text_file(out_path, csv.str());
  } else {
    std::cout << csv.str();
  }
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized incremental subspace-correction experiments"};
  app.require_subcommand(1);

  // run ----------------------------------------------------------------
  auto* run = app.add_subcommand("run", "Run a solver experiment and emit CSV/JSON");
  std::string run_config_path;
  std::uint64_t run_seed = 0;
  int run_runs = -1;
  int run_m_max = -1;
  int run_threads = 0;
  std::string run_csv, run_json;
  run->add_option("--config", run_config_path, "JSON config file")->required();
  run->add_option("--seed", run_seed, "Random seed (required for reproducibility)")->required();
  run->add_option("--runs", run_runs, "Override run count");
  run->add_option("--m-max", run_m_max, "Override iteration count");
  run->add_option("--threads", run_threads, "Thread cap (default SCHWARZ_RAND_THREADS)");
  run->add_option("--csv", run_csv, "CSV output path (default stdout)");
  run->add_option("--json", run_json, "JSON report path");

  // verify -------------------------------------------------------------
  auto* ver = app.add_subcommand("verify", "Run a verification suite");
  std::string suite = "all";
  VerifyConfig vconfig;
  std::string verify_json;
  bool list_suites = false;
  ver->add_option("suite", suite, "Suite name or 'all'");
  ver->add_option("--seed", vconfig.seed, "Random seed (default 42)");
  ver->add_option("--threads", vconfig.threads, "Thread cap");
  ver->add_option("--runs-scale", vconfig.runs_scale, "Scale factor for suite run counts");
  ver->add_option("--json", verify_json, "Write the reports as JSON");
  ver->add_flag("--list", list_suites, "List suite names and exit");

  // norms ----------------------------------------------------------------
  auto* norms = app.add_subcommand("norms", "Class norms of the configured target");
  std::string norms_config_path, norms_out;
  std::vector<double> norms_s = {0.25, 0.5, 1.0};
  norms->add_option("--config", norms_config_path, "JSON config file")->required();
  norms->add_option("--s", norms_s, "Smoothness exponents to evaluate");
  norms->add_option("--out", norms_out, "Output path (default stdout)");

  // sweep ----------------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "Parameter sweep with one summary row per case");
  std::string sweep_config_path, sweep_out;
  std::uint64_t sweep_seed = 0;
  int sweep_runs = -1;
  int sweep_m_max = -1;
  std::vector<double> sweep_s = {0.5};
  std::vector<double> sweep_beta = {1.0};
  std::vector<double> sweep_sigma = {0.0};
  std::vector<double> sweep_ratio = {0.85};
  sweep->add_option("--config", sweep_config_path, "JSON config file")->required();
  sweep->add_option("--seed", sweep_seed, "Random seed")->required();
  sweep->add_option("--runs", sweep_runs, "Override run count");
  sweep->add_option("--m-max", sweep_m_max, "Override iteration count");
  sweep->add_option("--s", sweep_s, "Smoothness grid");
  sweep->add_option("--beta", sweep_beta, "Greedy relaxation grid");
  sweep->add_option("--sigma", sweep_sigma, "Noise grid");
  sweep->add_option("--ratio", sweep_ratio, "Geometric weight ratio grid");
  sweep->add_option("--out", sweep_out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) {
      RunConfig config = load_run_config(run_config_path);
      config.seed = run_seed;
      if (run_runs >= 0) config.runs = run_runs;
      if (run_m_max >= 0) config.m_max = run_m_max;
      if (run_threads > 0) config.threads = run_threads;
      if (!run_csv.empty()) config.csv_path = run_csv;
      if (!run_json.empty()) config.json_path = run_json;
      if (config.runs < 1) throw ConfigError("runs must be at least 1");
      if (config.m_max < 0) throw ConfigError("m_max must be nonnegative");
      return cmd_run(config);
    }
    if (ver->parsed()) {
      if (list_suites) {
        for (const auto& name : verify_suites()) std::cout << name << "\n";
        return kExitOk;
      }
      return cmd_verify(suite, vconfig, verify_json);
    }
    if (norms->parsed()) {
      RunConfig config = load_run_config(norms_config_path);
      return cmd_norms(config, norms_s, norms_out);
    }
    if (sweep->parsed()) {
      RunConfig config = load_run_config(sweep_config_path);
      config.seed = sweep_seed;
      if (sweep_runs >= 1) config.runs = sweep_runs;
      if (sweep_m_max >= 0) config.m_max = sweep_m_max;
      return cmd_sweep(config, sweep_s, sweep_beta, sweep_sigma, sweep_ratio, sweep_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitConfig;
}
