#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reslab/landscape.hpp"

namespace reslab {

struct LandscapeConfig {
  std::string name = "benchmark";
  int dimension = 1;
  std::string depth_kind = "sinusoidal";  // "sinusoidal" | "constant"
  double depth_base = 0.5;
  double depth_amplitude = 0.25;
  double depth_value = 0.5;  // constant kind
  double phase_lag = 0.5;

  DepthFn make_depth() const;
  Benchmark build() const;
};

struct SimBlock {
  std::optional<double> epsilon;
  std::vector<double> epsilon_ladder;
  std::optional<double> mu;
  std::vector<double> mu_grid;
  int mu_grid_count = 0;  // auto grid inside I_R when > 0
  double dt = 1e-3;
  std::optional<double> rho;
  std::optional<double> h;
  std::vector<double> h_ladder;
  long path_count = 1000;
  std::uint64_t master_seed = 0;
  double horizon_multiplier = 1.05;
};

struct ActionBlock {
  int grid_size = 16;
  double t0 = 0.0;  // 0 = automatic
  double t_max = 320.0;
  double grad_tol = 1e-6;
  int max_iterations = 10000;
};

struct QueryBlock {
  double phase = 0.0;
  std::vector<double> x;
  std::vector<double> y;
};

struct OutputBlock {
  std::string directory = "out";
  std::vector<std::string> formats = {"csv", "json"};
};

struct ExperimentConfig {
  LandscapeConfig landscape;
  SimBlock sim;
  ActionBlock action;
  QueryBlock query;
  OutputBlock output;
  std::uint64_t config_hash = 0;

  // Parses strictly: unknown keys and malformed values raise ConfigError
  // naming the offending key.
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);

  // Requires the listed sim keys for the chosen subcommand.
  void require(const std::string& subcommand) const;

  std::vector<double> resolved_eps_ladder() const;  // ladder or {epsilon}
  std::vector<double> resolved_h_ladder() const;    // ladder or {h}
};

}  // namespace reslab
