#ifndef DISCOFLUX_CONFIG_HPP
#define DISCOFLUX_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace discoflux {

/// Experiment knobs read from a flat key=value file ('#' starts a comment).
struct ExperimentConfig {
  // model
  std::vector<double> lambda_breaks{0.0, 0.5};
  std::vector<double> lambda_values{2.0, 1.0};
  std::string rate = "indicator";
  std::string closure = "rate";
  double rho_m = 1.0;
  double rho_max = 50.0;
  double sigma = 0.5;

  // initial data
  std::string initial = "pieces";
  double rho_const = 1.0;
  std::vector<double> rho_pieces{1.0 / 3.0, 2.0};
  std::vector<double> rho_table;
  double alpha = 0.5;

  // particle ensembles
  std::vector<int> n_ladder{250, 500, 1000, 2000};
  int replicas = 50;
  int block_radius = 10;
  std::string l_schedule = "fixed";
  int bins = 10;
  int sites = 1000;
  int checkpoints = 10;
  double couple_alpha = 0.5;
  long long event_budget = -1;

  // deterministic solver
  double horizon = 0.4;
  int ref_cells = 4096;
  int cells = 512;
  double epsilon = 1.0 / 16.0;
  double eps0 = 1.0 / 16.0;
  int eps_levels = 5;
  std::vector<double> snapshot_times;
  std::vector<double> alphas{0.5};
  int audit_intervals = 40;
  int alpha_count = 12;

  // run control
  bool timing = true;
  bool checks = true;
  std::uint64_t seed = 1;
  std::string output = "out";
  int threads = 1;
};

/// Parses key=value text; unknown keys, malformed values and repeated keys are ConfigError.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path);

/// Throws ConfigError when the knobs are inconsistent.
void validate(const ExperimentConfig& cfg);

/// One line per key: name, type, default, meaning.
std::string config_help();

/// Canonical key=value dump (round-trips through parse_config).
std::string dump_config(const ExperimentConfig& cfg);

}  // namespace discoflux

#endif  // DISCOFLUX_CONFIG_HPP
