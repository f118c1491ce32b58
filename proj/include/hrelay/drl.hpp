#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hrelay/mdp_env.hpp"
#include "hrelay/monotonic_lb.hpp"
#include "hrelay/neural.hpp"

namespace hrelay {

using Net = Mlp<double>;
using Adam = AdamState<double>;

struct TransitionSample {
  Eigen::VectorXd state;       // scaled features
  ModeVector modes;
  Eigen::VectorXd action;      // raw continuous action, length 1+4K+N
  double reward = 0.0;
  Eigen::VectorXd next_state;  // scaled features
  bool done = false;
  std::optional<double> optimizer_target;
  bool optimizer_flag = false;
};

/// One outer-loop sample: modes chosen at the start of an episode.
struct ModeTransition {
  Eigen::VectorXd state;
  std::uint32_t mode = 0;
  double reward = 0.0;
  Eigen::VectorXd next_state;
  bool done = true;
};

template <typename T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 1) : capacity_(capacity) {
    if (capacity == 0) throw DomainError("ReplayBuffer: capacity must be >= 1");
  }

  void push(T sample) {
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back(std::move(sample));
  }

  /// min(n, size) distinct samples, uniformly without replacement.
  std::vector<const T*> sample(std::size_t n, std::mt19937_64& rng) const {
    std::vector<std::size_t> idx(items_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const std::size_t take = std::min(n, idx.size());
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < take; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    std::vector<const T*> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back(&items_[idx[i]]);
    return out;
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const T& operator[](std::size_t i) const { return items_[i]; }

 private:
  std::size_t capacity_;
  std::deque<T> items_;
};

enum class TrainMode { model_free, simplified, full_opt };

std::string to_string(TrainMode mode);
TrainMode parse_train_mode(const std::string& s);

struct AgentConfig {
  double gamma = 0.9;
  double sigma_noise = 0.3;
  double sigma_decay = 0.995;   // per episode
  double eps_start = 1.0;
  double eps_end = 0.05;
  int eps_decay_episodes = 200;
  int batch_size = 32;
  std::size_t ddpg_capacity = 100000;
  std::size_t dqn_capacity = 10000;
  int dqn_sync_every = 100;     // DQN training steps between hard copies
  double tau = 0.005;
  double lr_actor = 1e-4;
  double lr_critic = 1e-3;
  double lr_dqn = 1e-3;
  int hidden = 128;
  int convergence_window = 20;  // M: last inner rewards averaged for the outer reward
  LowerBoundOptions lower_bound;

  void validate() const;
  double epsilon(int episode) const;
  double sigma(int episode) const;
};

struct Agents {
  Net q, q_target;
  Net actor, actor_target;
  Net critic, critic_target;
  Adam q_opt, actor_opt, critic_opt;
  ReplayBuffer<TransitionSample> ddpg_buffer;
  ReplayBuffer<ModeTransition> dqn_buffer;
  std::mt19937_64 rng;
  std::uint64_t dqn_steps = 0;
  Eigen::VectorXd feature_scale;
  int antennas = 0;
  int relays = 0;

  static Agents create(const Environment& env, const AgentConfig& cfg, std::uint64_t seed);
  Eigen::VectorXd features(const EnvState& state, double e_max) const;
};

Eigen::VectorXd mode_bits(const ModeVector& modes);
Eigen::VectorXd actor_input(const Eigen::VectorXd& features, const ModeVector& modes);
Eigen::VectorXd critic_input(const Eigen::VectorXd& features, const ModeVector& modes,
                             const Eigen::VectorXd& raw_action);

/// epsilon-greedy over the 2^N heads; ties go to the lowest index.
ModeVector dqn_select_modes(const Net& q_net, const Eigen::VectorXd& features, double epsilon,
                            std::mt19937_64& rng);

Eigen::VectorXd ddpg_act(const Net& actor, const Eigen::VectorXd& input, double sigma,
                         std::mt19937_64& rng);

struct Proposal {
  HybridAction action;  // decode_action(raw), relays at their power limit
  Eigen::VectorXd raw;
  double reward = 0.0;  // env.evaluate of `action`
  bool ok = false;      // false when the solver failed
  std::string failure;
};

/// Model-based action for fixed modes: passive phases co-phased, then the full
/// polyblock search, or a single solve at `t_hint` for the simplified variant.
/// The action is decoded from its raw encoding so it is exactly what the actor
/// could output, and its reward is re-evaluated by the environment.
Proposal optimized_proposal(const Environment& env, const EnvState& state, const ModeVector& modes,
                            TrainMode variant, double t_hint, const LowerBoundOptions& opts);

struct Merge {
  bool use_optimizer = false;
  std::optional<double> override_target;
};

/// Optimizer action wins only on a strict improvement.
Merge merge_targets(double y_t, double y_opt);

struct DdpgLosses {
  double critic = 0.0;
  double actor = 0.0;  // -mean Q after the critic update
};

DdpgLosses ddpg_train_step(Agents& ag, const AgentConfig& cfg,
                           const std::vector<const TransitionSample*>& batch);

/// Critic targets for a batch, before any update.
Eigen::VectorXd ddpg_targets(const Agents& ag, const AgentConfig& cfg,
                             const std::vector<const TransitionSample*>& batch);

/// Gradient of -mean Q(s, pi(s)) w.r.t. the actor parameters at a frozen critic.
Eigen::VectorXd actor_gradient(const Net& actor, const Net& critic,
                               const std::vector<const TransitionSample*>& batch);

double dqn_train_step(Agents& ag, const AgentConfig& cfg,
                      const std::vector<const ModeTransition*>& batch);

struct EpisodeRecord {
  int episode = 0;
  ModeVector modes;
  std::vector<double> rewards;
  double override_rate = 0.0;
  double outer_reward = 0.0;
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double dqn_loss = 0.0;
  int solver_failures = 0;
  double runtime_ms = 0.0;

  double mean_reward() const;
};

EpisodeRecord run_episode(const Environment& env, Agents& ag, const AgentConfig& cfg, TrainMode mode,
                          int episode, std::uint64_t episode_seed);

/// Runs `episodes` episodes from fresh agents; episode seeds derive from `seed`.
std::vector<EpisodeRecord> train(const Environment& env, const AgentConfig& cfg, TrainMode mode,
                                 int episodes, std::uint64_t seed,
                                 const std::function<void(const EpisodeRecord&)>& on_episode = {},
                                 Agents* final_agents = nullptr);

}  // namespace hrelay
