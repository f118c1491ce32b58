#pragma once

#include <cstdint>
#include <vector>

#include "hrelay/phy_layer.hpp"

namespace hrelay {

struct EnvConfig {
  Topology topology = Topology::default_layout();
  PathLossModel path_loss;
  LinkBudget budget;
  double gamma_max = 0.5;
  // Stored energy is counted in units of energy_unit_mw x slot.
  double energy_unit_mw = 1e-3;
  double e_max = 10.0;
  double e_init = 0.0;
  double passive_cost = 1e-3;   // drawn per slot by a passive relay
  int episode_length = 100;

  void validate() const;
};

struct EnvState {
  ChannelRealization channels;
  std::vector<double> energy;  // per relay, in [0, e_max], energy units
  int epoch = 0;
  std::uint64_t episode_seed = 0;
};

struct StepInfo {
  std::vector<double> harvested;     // per relay, energy units
  std::vector<double> spent;         // per relay, energy units
  std::vector<double> relay_powers;  // per relay in mW, 0 for passive
};

struct StepOutcome {
  double reward = 0.0;
  EnvState next_state;
  StepInfo info;
  bool done = false;
};

int feature_length(int antennas, int relays);
int action_length(int antennas, int relays);

/// [Re,Im f0 | Re,Im f_1 .. f_N | Re,Im g | Re,Im z_mn for m<n | e/e_max].
Eigen::VectorXd encode_state(const EnvState& state, double e_max);

/// Inverse of the channel block of encode_state.
ChannelRealization decode_channels(const Eigen::VectorXd& features, int antennas, int relays,
                                   double noise_amplitude = 1.0);

/// raw = [t | Re w0, Im w0 | Re w1, Im w1 | theta], length 1 + 4K + N.
/// relay_powers is left empty, meaning each active relay runs at its limit.
HybridAction decode_action(const Eigen::VectorXd& raw, const ModeVector& modes, int antennas);

/// Right inverse of decode_action on its range, with t clamped into
/// [t_min, 1/2 - t_min] and saturated entries clamped to +-19.
Eigen::VectorXd encode_action(const HybridAction& action);

class Environment {
 public:
  explicit Environment(EnvConfig cfg);

  const EnvConfig& config() const { return cfg_; }
  int antennas() const { return cfg_.topology.antennas; }
  int relays() const { return cfg_.topology.relay_count(); }
  int feature_size() const { return feature_length(antennas(), relays()); }
  int action_size() const { return action_length(antennas(), relays()); }

  EnvState reset(std::uint64_t seed) const;

  /// Powers each active relay (parallel to enh.active) would run at: the
  /// requested power if any, capped by the harvest budget and by stored
  /// energy over t.
  std::vector<double> executed_powers(const EnvState& state, const EnhancedChannels& enh,
                                      const HybridAction& action) const;

  /// Reward the action would earn in `state`, without advancing.
  double evaluate(const EnvState& state, const HybridAction& action) const;

  StepOutcome step(const EnvState& state, const HybridAction& action) const;

  /// Per-feature multipliers bringing channel entries to unit scale, for
  /// network inputs.
  Eigen::VectorXd feature_scale() const;

 private:
  ChannelRealization draw(std::uint64_t episode_seed, int epoch) const;
  void check_action(const HybridAction& action) const;

  EnvConfig cfg_;
};

}  // namespace hrelay
