#include "reslab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "reslab/io.hpp"

namespace reslab {

using nlohmann::json;

DepthFn LandscapeConfig::make_depth() const {
  if (depth_kind == "constant") {
    const double v = depth_value;
    return [v](double) { return v; };
  }
  const double base = depth_base, amp = depth_amplitude;
  return [base, amp](double t) { return base + amp * std::cos(2.0 * M_PI * t); };
}

Benchmark LandscapeConfig::build() const {
  if (name != "benchmark") throw ConfigError("unknown landscape.name: " + name);
  return make_benchmark(dimension, make_depth(), phase_lag);
}

namespace {

void check_keys(const json& obj, const std::string& prefix, const std::set<std::string>& known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key()))
      throw ConfigError("unknown config key: " + prefix + it.key());
  }
}

template <typename T>
T get_or(const json& obj, const std::string& key, const std::string& prefix, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("malformed value for config key: " + prefix + key);
  }
}

std::vector<double> get_array(const json& obj, const std::string& key,
                              const std::string& prefix) {
  if (!obj.contains(key)) return {};
  try {
    return obj.at(key).get<std::vector<double>>();
  } catch (const json::exception&) {
    throw ConfigError("malformed value for config key: " + prefix + key);
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root, "", {"landscape", "sim", "action", "query", "output"});

  ExperimentConfig cfg;
  cfg.config_hash = fnv1a_hash(root.dump());

  if (root.contains("landscape")) {
    const json& l = root["landscape"];
    check_keys(l, "landscape.", {"name", "dimension", "depth", "phase_lag"});
    cfg.landscape.name = get_or<std::string>(l, "name", "landscape.", "benchmark");
    cfg.landscape.dimension = get_or<int>(l, "dimension", "landscape.", 1);
    cfg.landscape.phase_lag = get_or<double>(l, "phase_lag", "landscape.", 0.5);
    if (l.contains("depth")) {
      const json& d = l["depth"];
      check_keys(d, "landscape.depth.", {"kind", "base", "amplitude", "value"});
      cfg.landscape.depth_kind = get_or<std::string>(d, "kind", "landscape.depth.", "sinusoidal");
      cfg.landscape.depth_base = get_or<double>(d, "base", "landscape.depth.", 0.5);
      cfg.landscape.depth_amplitude = get_or<double>(d, "amplitude", "landscape.depth.", 0.25);
      cfg.landscape.depth_value = get_or<double>(d, "value", "landscape.depth.", 0.5);
      if (cfg.landscape.depth_kind != "sinusoidal" && cfg.landscape.depth_kind != "constant")
        throw ConfigError("landscape.depth.kind must be 'sinusoidal' or 'constant'");
    }
  }

  if (root.contains("sim")) {
    const json& s = root["sim"];
    check_keys(s, "sim.",
               {"epsilon", "epsilon_ladder", "mu", "mu_grid", "mu_grid_count", "dt", "rho", "h",
                "h_ladder", "path_count", "master_seed", "horizon_multiplier"});
    if (s.contains("epsilon")) cfg.sim.epsilon = get_or<double>(s, "epsilon", "sim.", 0.0);
    cfg.sim.epsilon_ladder = get_array(s, "epsilon_ladder", "sim.");
    if (s.contains("mu")) cfg.sim.mu = get_or<double>(s, "mu", "sim.", 0.0);
    cfg.sim.mu_grid = get_array(s, "mu_grid", "sim.");
    cfg.sim.mu_grid_count = get_or<int>(s, "mu_grid_count", "sim.", 0);
    cfg.sim.dt = get_or<double>(s, "dt", "sim.", 1e-3);
    if (s.contains("rho")) cfg.sim.rho = get_or<double>(s, "rho", "sim.", 0.0);
    if (s.contains("h")) cfg.sim.h = get_or<double>(s, "h", "sim.", 0.0);
    cfg.sim.h_ladder = get_array(s, "h_ladder", "sim.");
    cfg.sim.path_count = get_or<long>(s, "path_count", "sim.", 1000);
    cfg.sim.master_seed = get_or<std::uint64_t>(s, "master_seed", "sim.", 0);
    cfg.sim.horizon_multiplier = get_or<double>(s, "horizon_multiplier", "sim.", 1.05);
  }

  if (root.contains("action")) {
    const json& a = root["action"];
    check_keys(a, "action.", {"grid_size", "t0", "t_max", "grad_tol", "max_iterations"});
    cfg.action.grid_size = get_or<int>(a, "grid_size", "action.", 16);
    cfg.action.t0 = get_or<double>(a, "t0", "action.", 0.0);
    cfg.action.t_max = get_or<double>(a, "t_max", "action.", 320.0);
    cfg.action.grad_tol = get_or<double>(a, "grad_tol", "action.", 1e-6);
    cfg.action.max_iterations = get_or<int>(a, "max_iterations", "action.", 10000);
  }

  if (root.contains("query")) {
    const json& q = root["query"];
    check_keys(q, "query.", {"phase", "x", "y"});
    cfg.query.phase = get_or<double>(q, "phase", "query.", 0.0);
    cfg.query.x = get_array(q, "x", "query.");
    cfg.query.y = get_array(q, "y", "query.");
  }

  if (root.contains("output")) {
    const json& o = root["output"];
    check_keys(o, "output.", {"directory", "formats"});
    cfg.output.directory = get_or<std::string>(o, "directory", "output.", "out");
    if (o.contains("formats")) {
      try {
        cfg.output.formats = o.at("formats").get<std::vector<std::string>>();
      } catch (const json::exception&) {
        throw ConfigError("malformed value for config key: output.formats");
      }
    }
  }

  // global numeric range checks
  if (cfg.sim.epsilon && !(*cfg.sim.epsilon > 0.0)) throw ConfigError("sim.epsilon must be > 0");
  for (double e : cfg.sim.epsilon_ladder)
    if (!(e > 0.0)) throw ConfigError("sim.epsilon_ladder entries must be > 0");
  if (cfg.sim.h && !(*cfg.sim.h > 0.0)) throw ConfigError("sim.h must be > 0");
  for (double h : cfg.sim.h_ladder)
    if (!(h > 0.0)) throw ConfigError("sim.h_ladder entries must be > 0");
  if (cfg.sim.rho && !(*cfg.sim.rho > 0.0)) throw ConfigError("sim.rho must be > 0");
  if (cfg.sim.path_count < 1) throw ConfigError("sim.path_count must be >= 1");
  if (!(cfg.sim.dt > 0.0)) throw ConfigError("sim.dt must be > 0");
  if (cfg.action.grid_size < 4) throw ConfigError("action.grid_size must be >= 4");
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

void ExperimentConfig::require(const std::string& subcommand) const {
  auto need = [&](bool ok, const std::string& key) {
    if (!ok)
      throw ConfigError("missing config key `" + key + "` required by subcommand `" +
                        subcommand + "`");
  };
  const bool has_eps = sim.epsilon.has_value() || !sim.epsilon_ladder.empty();
  const bool has_mu = sim.mu.has_value() || !sim.mu_grid.empty() || sim.mu_grid_count > 0;
  if (subcommand == "simulate") {
    need(sim.epsilon.has_value(), "sim.epsilon");
    need(sim.mu.has_value(), "sim.mu");
    need(sim.rho.has_value(), "sim.rho");
  } else if (subcommand == "window") {
    need(sim.epsilon.has_value(), "sim.epsilon");
    need(sim.mu.has_value(), "sim.mu");
    need(sim.h.has_value() || !sim.h_ladder.empty(), "sim.h");
    need(sim.rho.has_value(), "sim.rho");
  } else if (subcommand == "rate") {
    need(has_eps, "sim.epsilon_ladder");
    need(has_mu, "sim.mu");
    need(sim.h.has_value(), "sim.h");
    need(sim.rho.has_value(), "sim.rho");
  } else if (subcommand == "resonance") {
    need(sim.h.has_value() || !sim.h_ladder.empty(), "sim.h_ladder");
  } else if (subcommand == "chain") {
    need(has_eps, "sim.epsilon");
    need(has_mu, "sim.mu");
    need(sim.h.has_value(), "sim.h");
  } else if (subcommand == "compare") {
    need(has_eps, "sim.epsilon");
    need(has_mu, "sim.mu_grid");
    need(sim.h.has_value(), "sim.h");
  } else if (subcommand == "qp") {
    need(!query.x.empty(), "query.x");
    need(!query.y.empty(), "query.y");
  }
}

std::vector<double> ExperimentConfig::resolved_eps_ladder() const {
  if (!sim.epsilon_ladder.empty()) return sim.epsilon_ladder;
  if (sim.epsilon) return {*sim.epsilon};
  return {};
}

std::vector<double> ExperimentConfig::resolved_h_ladder() const {
  if (!sim.h_ladder.empty()) return sim.h_ladder;
  if (sim.h) return {*sim.h};
  return {0.2, 0.15, 0.1, 0.05};
}

}  // namespace reslab
