#include "schwarz/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace schwarz {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& known, const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) {
      throw ConfigError(std::string(where) + ": unknown key '" + it.key() + "'");
    }
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

Vector get_vector(const json& j) {
  if (!j.is_array()) throw ConfigError("expected an array of numbers");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("expected an array of numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

WeightsConfig parse_weights(const json& j) {
  WeightsConfig w;
  if (j.is_string()) {
    w.kind = j.get<std::string>();
    if (w.kind != "uniform") throw ConfigError("weights: unknown shorthand '" + w.kind + "'");
    return w;
  }
  if (j.is_array()) {
    w.kind = "explicit";
    w.values = get_vector(j);
    return w;
  }
  if (j.is_object()) {
    reject_unknown_keys(j, {"kind", "ratio", "values"}, "weights");
    w.kind = get_or<std::string>(j, "kind", "uniform");
    w.ratio = get_or<double>(j, "ratio", 0.85);
    if (j.contains("values")) w.values = get_vector(j.at("values"));
    if (w.kind != "uniform" && w.kind != "geometric" && w.kind != "explicit") {
      throw ConfigError("weights: unknown kind '" + w.kind + "'");
    }
    return w;
  }
  throw ConfigError("weights: expected string, array, or object");
}

json weights_to_json(const WeightsConfig& w) {
  json j;
  j["kind"] = w.kind;
  if (w.kind == "geometric") j["ratio"] = w.ratio;
  if (w.kind == "explicit") {
    j["values"] = std::vector<double>(w.values.data(), w.values.data() + w.values.size());
  }
  return j;
}

} // namespace

Vector make_weights(const WeightsConfig& config, int n) {
  if (n < 1) throw ConfigError("weights: need a positive atom count");
  if (config.kind == "uniform") {
    return Vector::Constant(n, 1.0 / n);
  }
  if (config.kind == "geometric") {
    if (!(config.ratio > 0.0 && config.ratio < 1.0)) {
      throw ConfigError("weights: geometric ratio must lie in (0,1)");
    }
    Vector w(n);
    double v = 1.0;
    for (int i = 0; i < n; ++i) {
      w(i) = v;
      v *= config.ratio;
    }
    return w / w.sum();
  }
  if (config.kind == "explicit") {
    if (config.values.size() != n) {
      throw ConfigError("weights: expected " + std::to_string(n) + " values, got " +
                        std::to_string(config.values.size()));
    }
    if ((config.values.array() <= 0.0).any()) {
      throw ConfigError("weights: values must be strictly positive");
    }
    return config.values / config.values.sum();
  }
  throw ConfigError("weights: unknown kind '" + config.kind + "'");
}

RunConfig parse_run_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  reject_unknown_keys(j,
                      {"instance", "target", "solver", "m_max", "runs", "seed", "threads",
                       "output"},
                      "config");
  RunConfig config;

  if (j.contains("instance")) {
    const json& inst = j.at("instance");
    reject_unknown_keys(inst,
                        {"type", "dim", "weights", "atom_count", "atom_seed", "kernel", "width",
                         "nodes", "jitter", "n", "phi_seed"},
                        "instance");
    config.instance.type = get_or<std::string>(inst, "type", "orthonormal");
    config.instance.dim = get_or<int>(inst, "dim", 2);
    if (inst.contains("weights")) config.instance.weights = parse_weights(inst.at("weights"));
    config.instance.atom_count = get_or<int>(inst, "atom_count", 0);
    config.instance.atom_seed = get_or<std::uint64_t>(inst, "atom_seed", 1);
    config.instance.kernel = get_or<std::string>(inst, "kernel", "gaussian");
    config.instance.width = get_or<double>(inst, "width", 0.2);
    config.instance.nodes = get_or<int>(inst, "nodes", 64);
    config.instance.jitter = get_or<double>(inst, "jitter", 1e-10);
    config.instance.n = get_or<int>(inst, "n", 1);
    config.instance.phi_seed = get_or<std::uint64_t>(inst, "phi_seed", 2);
  }
  if (j.contains("target")) {
    const json& t = j.at("target");
    reject_unknown_keys(t, {"kind", "s", "coeffs", "coeff_seed", "values", "index"}, "target");
    config.target.kind = get_or<std::string>(t, "kind", "hs_element");
    config.target.s = get_or<double>(t, "s", 0.5);
    if (t.contains("coeffs")) {
      if (t.at("coeffs").is_array()) {
        config.target.coeffs = "explicit";
        config.target.values = get_vector(t.at("coeffs"));
      } else {
        config.target.coeffs = get_or<std::string>(t, "coeffs", "random");
      }
    }
    config.target.coeff_seed = get_or<std::uint64_t>(t, "coeff_seed", 1);
    if (t.contains("values")) config.target.values = get_vector(t.at("values"));
    config.target.basis_index = get_or<int>(t, "index", 0);
  }
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    reject_unknown_keys(s, {"variant", "beta", "sigma", "xi_schedule", "xi0"}, "solver");
    config.solver.variant = get_or<std::string>(s, "variant", "random");
    config.solver.beta = get_or<double>(s, "beta", 1.0);
    config.solver.sigma = get_or<double>(s, "sigma", 0.0);
    config.solver.xi_schedule = get_or<std::string>(s, "xi_schedule", "optimal");
    config.solver.xi0 = get_or<double>(s, "xi0", 1.0);
  }
  config.m_max = get_or<int>(j, "m_max", 64);
  config.runs = get_or<int>(j, "runs", 100);
  if (j.contains("seed")) config.seed = get_or<std::uint64_t>(j, "seed", 0);
  config.threads = get_or<int>(j, "threads", 0);
  if (j.contains("output")) {
    const json& o = j.at("output");
    reject_unknown_keys(o, {"csv", "json"}, "output");
    config.csv_path = get_or<std::string>(o, "csv", "");
    config.json_path = get_or<std::string>(o, "json", "");
  }

  if (config.m_max < 0) throw ConfigError("config: m_max must be nonnegative");
  if (config.runs < 1) throw ConfigError("config: runs must be at least 1");
  const std::set<std::string> variants = {"random", "omp", "greedy", "noisy"};
  if (!variants.count(config.solver.variant)) {
    throw ConfigError("solver: unknown variant '" + config.solver.variant + "'");
  }
  if (!(config.solver.beta > 0.0 && config.solver.beta <= 1.0)) {
    throw ConfigError("solver: beta must lie in (0, 1]");
  }
  if (config.solver.sigma < 0.0) throw ConfigError("solver: sigma must be nonnegative");
  if (config.solver.xi_schedule != "optimal" && config.solver.xi_schedule != "prescribed") {
    throw ConfigError("solver: xi_schedule must be 'optimal' or 'prescribed'");
  }
  return config;
}

json run_config_to_json(const RunConfig& config) {
  json j;
  json inst;
  inst["type"] = config.instance.type;
  inst["dim"] = config.instance.dim;
  inst["weights"] = weights_to_json(config.instance.weights);
  if (config.instance.type == "unit_dictionary") {
    inst["atom_count"] = config.instance.atom_count;
    inst["atom_seed"] = config.instance.atom_seed;
  } else if (config.instance.type == "rkhs") {
    inst["kernel"] = config.instance.kernel;
    inst["width"] = config.instance.width;
    inst["nodes"] = config.instance.nodes;
    inst["jitter"] = config.instance.jitter;
  } else if (config.instance.type == "collective") {
    inst["atom_count"] = config.instance.atom_count;
    inst["atom_seed"] = config.instance.atom_seed;
    inst["n"] = config.instance.n;
    inst["phi_seed"] = config.instance.phi_seed;
  }
  j["instance"] = std::move(inst);

  json t;
  t["kind"] = config.target.kind;
  if (config.target.kind == "hs_element") {
    t["s"] = config.target.s;
    if (config.target.coeffs == "explicit") {
      t["coeffs"] = std::vector<double>(config.target.values.data(),
                                        config.target.values.data() + config.target.values.size());
    } else {
      t["coeffs"] = config.target.coeffs;
      t["coeff_seed"] = config.target.coeff_seed;
    }
  } else if (config.target.kind == "coeffs") {
    t["values"] = std::vector<double>(config.target.values.data(),
                                      config.target.values.data() + config.target.values.size());
  } else if (config.target.kind == "basis") {
    t["index"] = config.target.basis_index;
  }
  j["target"] = std::move(t);

  json s;
  s["variant"] = config.solver.variant;
  if (config.solver.variant == "greedy") s["beta"] = config.solver.beta;
  if (config.solver.variant == "noisy") {
    s["sigma"] = config.solver.sigma;
    s["xi_schedule"] = config.solver.xi_schedule;
    if (config.solver.xi_schedule == "prescribed") s["xi0"] = config.solver.xi0;
  }
  j["solver"] = std::move(s);

  j["m_max"] = config.m_max;
  j["runs"] = config.runs;
  if (config.seed) j["seed"] = *config.seed;
  if (config.threads != 0) j["threads"] = config.threads;
  if (!config.csv_path.empty() || !config.json_path.empty()) {
    json o;
    if (!config.csv_path.empty()) o["csv"] = config.csv_path;
    if (!config.json_path.empty()) o["json"] = config.json_path;
    j["output"] = std::move(o);
  }
  return j;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse config file '" + path + "': " + e.what());
  }
  return parse_run_config(j);
}

SolverSpec solver_spec_from(const SolverConfig& config) {
  SolverSpec spec;
  if (config.variant == "random") {
    spec.variant = SolverVariant::random;
  } else if (config.variant == "omp") {
    spec.variant = SolverVariant::omp;
  } else if (config.variant == "greedy") {
    spec.variant = SolverVariant::greedy;
  } else if (config.variant == "noisy") {
    spec.variant = SolverVariant::noisy;
  } else {
    throw ConfigError("solver: unknown variant '" + config.variant + "'");
  }
  spec.beta = config.beta;
  spec.noise.sigma = config.sigma;
  spec.noise.xi_schedule.optimal = config.xi_schedule == "optimal";
  spec.noise.xi_schedule.xi0 = config.xi0;
  return spec;
}

BuiltSetup build_setup(const RunConfig& config) {
  const InstanceConfig& ic = config.instance;
  BuiltSetup setup;

  if (ic.type == "orthonormal") {
    if (ic.dim < 1) throw ConfigError("instance: dim must be positive");
    setup.instance = orthonormal_instance(ic.dim, make_weights(ic.weights, ic.dim));
    setup.description = "orthonormal d=" + std::to_string(ic.dim);
  } else if (ic.type == "unit_dictionary") {
    if (ic.dim < 1) throw ConfigError("instance: dim must be positive");
    const int count = ic.atom_count > 0 ? ic.atom_count : ic.dim;
    auto space = std::make_shared<InnerProductSpace>(InnerProductSpace::euclidean(ic.dim));
    RandomStream stream = RandomStream(ic.atom_seed).derive(77);
    const Matrix atoms = random_unit_atoms(*space, count, stream);
    setup.instance = unit_dictionary_instance(space, atoms, make_weights(ic.weights, count));
    setup.description =
        "unit_dictionary d=" + std::to_string(ic.dim) + " atoms=" + std::to_string(count);
  } else if (ic.type == "rkhs") {
    RkhsSpec spec;
    if (ic.kernel == "gaussian") {
      spec.kernel = KernelKind::gaussian;
    } else if (ic.kernel == "min_plus_one") {
      spec.kernel = KernelKind::min_plus_one;
    } else {
      throw ConfigError("instance: unknown kernel '" + ic.kernel + "'");
    }
    if (ic.nodes < 1) throw ConfigError("instance: nodes must be positive");
    spec.width = ic.width;
    spec.jitter_rel = ic.jitter;
    spec.nodes = Vector::LinSpaced(ic.nodes, 0.0, 1.0);
    RkhsRealization rkhs(spec, make_weights(ic.weights, ic.nodes));
    setup.instance = rkhs.instance();
    setup.description = "rkhs " + ic.kernel + " nodes=" + std::to_string(ic.nodes);
  } else if (ic.type == "collective") {
    if (ic.dim < 1 || ic.n < 1) throw ConfigError("instance: dim and n must be positive");
    const int count = ic.atom_count > 0 ? ic.atom_count : 2 * ic.dim;
    auto h_space = std::make_shared<InnerProductSpace>(InnerProductSpace::euclidean(ic.dim));
    RandomStream stream = RandomStream(ic.atom_seed).derive(78);
    const Matrix dict = random_unit_atoms(*h_space, count, stream);
    RandomStream phi_stream = RandomStream(ic.phi_seed).derive(79);
    Matrix raw(ic.dim, ic.n);
    for (int j = 0; j < ic.n; ++j) {
      for (int i = 0; i < ic.dim; ++i) raw(i, j) = phi_stream.next_gaussian();
    }
    const Matrix phi =
        Eigen::HouseholderQR<Matrix>(raw).householderQ() * Matrix::Identity(ic.dim, ic.n);
    CollectiveSpec cspec{ic.dim, ic.n, phi, dict};
    CollectiveRealization collective(cspec, make_weights(ic.weights, count), h_space);
    setup.instance = collective.instance();
    setup.target = collective.target();
    setup.description = "collective d=" + std::to_string(ic.dim) + " n=" + std::to_string(ic.n) +
                        " atoms=" + std::to_string(count);
  } else {
    throw ConfigError("instance: unknown type '" + ic.type + "'");
  }

  // Covariance decomposition when the instance carries unit atoms.
  if (setup.instance.atoms.size() > 0) {
    auto space = std::make_shared<InnerProductSpace>(setup.instance.family->space());
    setup.decomp = spectral_decomp(setup.instance.covariance(), space);
  }

  const TargetConfig& tc = config.target;
  if (ic.type == "collective") {
    if (tc.kind != "hs_element" && tc.kind != "phi") {
      throw ConfigError("target: collective instances fix the target to the orthonormal block");
    }
    return setup;
  }

  if (tc.kind == "hs_element") {
    if (!setup.decomp) throw ConfigError("target: hs_element needs an atom dictionary");
    if (tc.coeffs == "random") {
      RandomStream stream = RandomStream(tc.coeff_seed).derive(101);
      setup.target = make_hs_element(*setup.decomp, tc.s, stream);
    } else if (tc.coeffs == "flat") {
      const int rank = setup.decomp->rank;
      setup.target = make_hs_element(
          *setup.decomp, tc.s, Vector::Constant(rank, 1.0 / std::sqrt(double(rank))));
    } else if (tc.coeffs == "explicit") {
      setup.target = make_hs_element(*setup.decomp, tc.s, tc.values);
    } else {
      throw ConfigError("target: coeffs must be 'random', 'flat', or an array");
    }
  } else if (tc.kind == "coeffs") {
    if (tc.values.size() != setup.instance.family->space().dim()) {
      throw ConfigError("target: coordinate vector has the wrong length");
    }
    setup.target = tc.values;
  } else if (tc.kind == "basis") {
    const int dim = setup.instance.family->space().dim();
    if (tc.basis_index < 0 || tc.basis_index >= dim) {
      throw ConfigError("target: basis index out of range");
    }
    setup.target = Vector::Zero(dim);
    setup.target(tc.basis_index) = 1.0;
  } else {
    throw ConfigError("target: unknown kind '" + tc.kind + "'");
  }
  return setup;
}

} // namespace schwarz
