#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hrelay/drl.hpp"

namespace hrelay {

/// Everything a run needs. Powers are kept in dBm here and converted to mW
/// only in env_config().
struct ExperimentConfig {
  Topology topology = Topology::default_layout();
  PathLossModel path_loss;              // direct_extra_attenuation_db is overridden per cell
  std::vector<double> p_t_dbm{0.0};
  std::vector<double> le_db{35.0};
  std::vector<int> relay_counts{5};
  std::vector<std::uint64_t> seeds{1};
  double eta = 0.6;
  double gamma_max = 0.5;

  double energy_unit_mw = 1e-3;
  double e_max = 10.0;
  double e_init = 0.0;
  double passive_cost = 1e-3;
  int episode_length = 100;

  AgentConfig agent;
  int episodes = 300;
  TrainMode mode = TrainMode::full_opt;

  std::vector<std::string> schemes{"dl_only", "random", "max_dl", "max_energy", "optimized"};
  int draws = 1;                // channel draws per static-scheme cell
  int agent_window = 50;        // last episodes averaged for agent cells
  bool record_runtime = false;  // runtime_ms stays 0 otherwise, keeping CSVs reproducible

  std::string out_dir = "runs";
  std::string run_id = "run";

  /// Throws ConfigError.
  void validate() const;
  EnvConfig env_config(double p_t_dbm, double le_db, int relays) const;
};

/// Parses the INI-style text. Unknown sections or keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace hrelay
