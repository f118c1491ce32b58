#include "hrelay/drl.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace hrelay {

std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::model_free:
      return "model_free";
    case TrainMode::simplified:
      return "simplified";
    case TrainMode::full_opt:
      return "full_opt";
  }
  return "?";
}

TrainMode parse_train_mode(const std::string& s) {
  if (s == "model_free") return TrainMode::model_free;
  if (s == "simplified") return TrainMode::simplified;
  if (s == "full_opt") return TrainMode::full_opt;
  throw DomainError("unknown mode '" + s + "' (expected model_free, simplified or full_opt)");
}

void AgentConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("agent: gamma outside (0,1)");
  if (!(sigma_noise >= 0.0)) throw DomainError("agent: sigma_noise must be >= 0");
  if (!(sigma_decay > 0.0 && sigma_decay <= 1.0)) throw DomainError("agent: sigma_decay outside (0,1]");
  if (!(eps_start >= 0.0 && eps_start <= 1.0 && eps_end >= 0.0 && eps_end <= 1.0))
    throw DomainError("agent: epsilon outside [0,1]");
  if (eps_decay_episodes < 0) throw DomainError("agent: eps_decay_episodes must be >= 0");
  if (batch_size < 1) throw DomainError("agent: batch_size must be >= 1");
  if (ddpg_capacity < 1 || dqn_capacity < 1) throw DomainError("agent: buffer capacity must be >= 1");
  if (dqn_sync_every < 1) throw DomainError("agent: dqn_sync_every must be >= 1");
  if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("agent: tau outside [0,1]");
  if (!(lr_actor > 0.0 && lr_critic > 0.0 && lr_dqn > 0.0)) throw DomainError("agent: learning rates must be > 0");
  if (hidden < 1) throw DomainError("agent: hidden must be >= 1");
  if (convergence_window < 1) throw DomainError("agent: convergence_window must be >= 1");
}

double AgentConfig::epsilon(int episode) const {
  if (eps_decay_episodes == 0 || episode >= eps_decay_episodes) return eps_end;
  const double frac = static_cast<double>(episode) / eps_decay_episodes;
  return eps_start + (eps_end - eps_start) * frac;
}

double AgentConfig::sigma(int episode) const { return sigma_noise * std::pow(sigma_decay, episode); }

Agents Agents::create(const Environment& env, const AgentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const int k = env.antennas();
  const int n = env.relays();
  if (n > 16) throw DomainError("Agents: at most 16 relays (2^N Q-heads)");
  const int f = env.feature_size();
  const int a = env.action_size();
  const int h = cfg.hidden;
  using A = Activation;
  Agents ag;
  ag.antennas = k;
  ag.relays = n;
  ag.q = Net({f, h, h, 1 << n}, {A::relu, A::relu, A::identity}, derive_seed(seed, 1));
  ag.actor = Net({f + n, h, h, a}, {A::relu, A::relu, A::identity}, derive_seed(seed, 2));
  ag.critic = Net({f + n + a, h, h, 1}, {A::relu, A::relu, A::identity}, derive_seed(seed, 3));
  ag.q_target = ag.q;
  ag.actor_target = ag.actor;
  ag.critic_target = ag.critic;
  ag.q_opt = Adam(ag.q.parameter_count(), cfg.lr_dqn);
  ag.actor_opt = Adam(ag.actor.parameter_count(), cfg.lr_actor);
  ag.critic_opt = Adam(ag.critic.parameter_count(), cfg.lr_critic);
  ag.ddpg_buffer = ReplayBuffer<TransitionSample>(cfg.ddpg_capacity);
  ag.dqn_buffer = ReplayBuffer<ModeTransition>(cfg.dqn_capacity);
  ag.rng.seed(derive_seed(seed, 4));
  ag.feature_scale = env.feature_scale();
  return ag;
}

Eigen::VectorXd Agents::features(const EnvState& state, double e_max) const {
  return encode_state(state, e_max).cwiseProduct(feature_scale);
}

Eigen::VectorXd mode_bits(const ModeVector& modes) {
  Eigen::VectorXd b(static_cast<Eigen::Index>(modes.size()));
  for (std::size_t i = 0; i < modes.size(); ++i) b(static_cast<Eigen::Index>(i)) = modes[i] ? 1.0 : 0.0;
  return b;
}

Eigen::VectorXd actor_input(const Eigen::VectorXd& features, const ModeVector& modes) {
  Eigen::VectorXd x(features.size() + static_cast<Eigen::Index>(modes.size()));
  x << features, mode_bits(modes);
  return x;
}

Eigen::VectorXd critic_input(const Eigen::VectorXd& features, const ModeVector& modes,
                             const Eigen::VectorXd& raw_action) {
  Eigen::VectorXd x(features.size() + static_cast<Eigen::Index>(modes.size()) + raw_action.size());
  x << features, mode_bits(modes), raw_action;
  return x;
}

ModeVector dqn_select_modes(const Net& q_net, const Eigen::VectorXd& features, double epsilon,
                            std::mt19937_64& rng) {
  const int heads = q_net.output_size();
  const int n = static_cast<int>(std::lround(std::log2(heads)));
  if ((1 << n) != heads) throw StructuralError("dqn_select_modes: head count is not a power of two");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(heads - 1));
    return modes_from_index(pick(rng), n);
  }
  const Eigen::VectorXd q = q_net.forward_one(features);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < q.size(); ++i)
    if (q(i) > q(best)) best = i;
  return modes_from_index(static_cast<std::uint32_t>(best), n);
}

Eigen::VectorXd ddpg_act(const Net& actor, const Eigen::VectorXd& input, double sigma,
                         std::mt19937_64& rng) {
  Eigen::VectorXd a = actor.forward_one(input);
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) += noise(rng);
  }
  return a;
}

Proposal optimized_proposal(const Environment& env, const EnvState& state, const ModeVector& modes,
                            TrainMode variant, double t_hint, const LowerBoundOptions& opts) {
  if (variant == TrainMode::model_free) throw DomainError("optimized_proposal: model_free has no optimizer");
  const EnvConfig& cfg = env.config();
  Proposal out;
  try {
    HybridAction a;
    a.modes = modes;
    a.phases = passive_phases(state.channels, modes, cfg.gamma_max);
    const EnhancedChannels enh = enhance_channels(state.channels, a.relay_config(cfg.gamma_max));
    if (variant == TrainMode::full_opt) {
      const LowerBoundResult lb = solve_lower_bound(enh, cfg.budget, opts);
      a.t = lb.t_opt;
      a.w0 = lb.w0_opt;
      a.w1 = lb.w1_exec;
    } else {
      const double t = std::clamp(t_hint, kTMin, 0.5 - kTMin);
      const FixedTResult fr = solve_fixed_t(enh, cfg.budget, t, opts.solver);
      a.t = t;
      a.w0 = fr.w0;
      a.w1 = fr.w1_exec;
    }
    // The actor cannot express relay powers, so candidates run at the power
    // limit. drive_relays' rotated w1 is kept only when it scores better there.
    const EnhancedChannels enh2 = enhance_channels(state.channels, a.relay_config(cfg.gamma_max));
    HybridAction rotated = a;
    rotated.w1 = drive_relays(enh2, a.w0, a.w1, a.t, cfg.budget).w1;
    out.reward = -1.0;
    for (const HybridAction* cand : {&a, &rotated}) {
      Eigen::VectorXd raw = encode_action(*cand);
      HybridAction snapped = decode_action(raw, modes, env.antennas());
      const double r = env.evaluate(state, snapped);
      if (r > out.reward) {
        out.reward = r;
        out.raw = std::move(raw);
        out.action = std::move(snapped);
      }
    }
    out.ok = std::isfinite(out.reward);
    if (!out.ok) out.failure = "non-finite reward";
  } catch (const std::exception& e) {
    out.ok = false;
    out.failure = e.what();
  }
  return out;
}

Merge merge_targets(double y_t, double y_opt) {
  Merge m;
  if (y_opt > y_t) {
    m.use_optimizer = true;
    m.override_target = y_opt;
  }
  return m;
}

namespace {

using Matrix = Eigen::MatrixXd;

// Column-stacked inputs for a batch.
Matrix stack_actor_inputs(const std::vector<const TransitionSample*>& batch, bool next) {
  const auto& s0 = *batch.front();
  const Eigen::Index rows = s0.state.size() + static_cast<Eigen::Index>(s0.modes.size());
  Matrix x(rows, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j)
    x.col(static_cast<Eigen::Index>(j)) = actor_input(next ? batch[j]->next_state : batch[j]->state, batch[j]->modes);
  return x;
}

// Critic inputs [features; modes; action] with the action block taken from `actions`.
Matrix stack_critic_inputs(const Matrix& actor_inputs, const Matrix& actions) {
  Matrix x(actor_inputs.rows() + actions.rows(), actor_inputs.cols());
  x.topRows(actor_inputs.rows()) = actor_inputs;
  x.bottomRows(actions.rows()) = actions;
  return x;
}

// Returns (gradient, -mean Q) and leaves the caches unused afterwards.
std::pair<Net::Gradients, double> actor_grad_impl(const Net& actor, const Net& critic,
                                                  const std::vector<const TransitionSample*>& batch) {
  const double b = static_cast<double>(batch.size());
  const Matrix xa = stack_actor_inputs(batch, false);
  Net::Cache actor_cache;
  const Matrix act = actor.forward(xa, &actor_cache);
  Net::Cache critic_cache;
  const Matrix q = critic.forward(stack_critic_inputs(xa, act), &critic_cache);
  const Matrix dq = Matrix::Constant(1, q.cols(), -1.0 / b);
  const Net::Gradients cg = critic.backward(critic_cache, dq);
  const Matrix da = cg.dx.bottomRows(act.rows());
  return {actor.backward(actor_cache, da), -q.mean()};
}

}  // namespace

Eigen::VectorXd ddpg_targets(const Agents& ag, const AgentConfig& cfg,
                             const std::vector<const TransitionSample*>& batch) {
  if (batch.empty()) throw DomainError("ddpg_targets: empty batch");
  const Matrix xn = stack_actor_inputs(batch, true);
  const Matrix an = ag.actor_target.forward(xn);
  const Matrix qn = ag.critic_target.forward(stack_critic_inputs(xn, an));
  Eigen::VectorXd y(static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const TransitionSample& s = *batch[j];
    const double boot = s.done ? 0.0 : cfg.gamma * qn(0, static_cast<Eigen::Index>(j));
    double target = s.reward + boot;
    if (s.optimizer_flag) {
      if (!s.optimizer_target) throw StructuralError("transition: flag set without optimizer target");
      target = std::max(target, *s.optimizer_target + boot);
    }
    y(static_cast<Eigen::Index>(j)) = target;
  }
  return y;
}

Eigen::VectorXd actor_gradient(const Net& actor, const Net& critic,
                               const std::vector<const TransitionSample*>& batch) {
  if (batch.empty()) throw DomainError("actor_gradient: empty batch");
  return actor.flatten(actor_grad_impl(actor, critic, batch).first);
}

DdpgLosses ddpg_train_step(Agents& ag, const AgentConfig& cfg,
                           const std::vector<const TransitionSample*>& batch) {
  if (batch.empty()) throw DomainError("ddpg_train_step: empty batch");
  const double b = static_cast<double>(batch.size());
  const Eigen::VectorXd y = ddpg_targets(ag, cfg, batch);

  const Matrix xa = stack_actor_inputs(batch, false);
  Matrix acts(batch.front()->action.size(), xa.cols());
  for (std::size_t j = 0; j < batch.size(); ++j) acts.col(static_cast<Eigen::Index>(j)) = batch[j]->action;
  Net::Cache cache;
  const Matrix q = ag.critic.forward(stack_critic_inputs(xa, acts), &cache);
  const Eigen::RowVectorXd err = q.row(0) - y.transpose();
  DdpgLosses out;
  out.critic = err.squaredNorm() / b;
  adam_step(ag.critic, ag.critic.backward(cache, (2.0 / b) * err), ag.critic_opt);

  auto [ga, neg_q] = actor_grad_impl(ag.actor, ag.critic, batch);
  out.actor = neg_q;
  adam_step(ag.actor, ga, ag.actor_opt);

  ag.actor_target = blend(ag.actor_target, ag.actor, cfg.tau);
  ag.critic_target = blend(ag.critic_target, ag.critic, cfg.tau);
  return out;
}

double dqn_train_step(Agents& ag, const AgentConfig& cfg,
                      const std::vector<const ModeTransition*>& batch) {
  if (batch.empty()) throw DomainError("dqn_train_step: empty batch");
  const double b = static_cast<double>(batch.size());
  const Eigen::Index f = batch.front()->state.size();
  Matrix x(f, static_cast<Eigen::Index>(batch.size()));
  Matrix xn(f, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    x.col(static_cast<Eigen::Index>(j)) = batch[j]->state;
    xn.col(static_cast<Eigen::Index>(j)) = batch[j]->next_state;
  }
  const Matrix qn = ag.q_target.forward(xn);
  Net::Cache cache;
  const Matrix q = ag.q.forward(x, &cache);
  Matrix dout = Matrix::Zero(q.rows(), q.cols());
  double loss = 0.0;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    const ModeTransition& s = *batch[j];
    const double y = s.reward + (s.done ? 0.0 : cfg.gamma * qn.col(c).maxCoeff());
    const double e = q(static_cast<Eigen::Index>(s.mode), c) - y;
    loss += e * e;
    dout(static_cast<Eigen::Index>(s.mode), c) = 2.0 * e / b;
  }
  adam_step(ag.q, ag.q.backward(cache, dout), ag.q_opt);
  ++ag.dqn_steps;
  if (ag.dqn_steps % static_cast<std::uint64_t>(cfg.dqn_sync_every) == 0) ag.q_target = blend(ag.q_target, ag.q, 1.0);
  return loss / b;
}

double EpisodeRecord::mean_reward() const {
  if (rewards.empty()) return 0.0;
  return std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(rewards.size());
}

EpisodeRecord run_episode(const Environment& env, Agents& ag, const AgentConfig& cfg, TrainMode mode,
                          int episode, std::uint64_t episode_seed) {
  const auto start = std::chrono::steady_clock::now();
  const EnvConfig& ec = env.config();
  EpisodeRecord rec;
  rec.episode = episode;

  EnvState state = env.reset(episode_seed);
  const Eigen::VectorXd x0 = ag.features(state, ec.e_max);
  rec.modes = dqn_select_modes(ag.q, x0, cfg.epsilon(episode), ag.rng);
  const double sigma = cfg.sigma(episode);

  int overrides = 0;
  int train_steps = 0;
  bool done = false;
  Eigen::VectorXd x = x0;
  while (!done) {
    const Eigen::VectorXd raw_c = ddpg_act(ag.actor, actor_input(x, rec.modes), sigma, ag.rng);
    const HybridAction a_c = decode_action(raw_c, rec.modes, ag.antennas);
    const double r_c = env.evaluate(state, a_c);

    HybridAction executed = a_c;
    Eigen::VectorXd raw = raw_c;
    std::optional<double> override_target;
    if (mode != TrainMode::model_free) {
      Proposal p = optimized_proposal(env, state, rec.modes, mode, a_c.t, cfg.lower_bound);
      if (p.ok) {
        const Merge m = merge_targets(r_c, p.reward);
        if (m.use_optimizer) {
          raw = std::move(p.raw);
          executed = std::move(p.action);
          override_target = m.override_target;
          ++overrides;
        }
      } else {
        ++rec.solver_failures;
      }
    }

    StepOutcome out = env.step(state, executed);
    const Eigen::VectorXd xn = ag.features(out.next_state, ec.e_max);
    TransitionSample s;
    s.state = x;
    s.modes = rec.modes;
    s.action = std::move(raw);
    s.reward = out.reward;
    s.next_state = xn;
    s.done = out.done;
    s.optimizer_flag = override_target.has_value();
    s.optimizer_target = override_target;
    ag.ddpg_buffer.push(std::move(s));
    rec.rewards.push_back(out.reward);

    if (ag.ddpg_buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
      const DdpgLosses l = ddpg_train_step(ag, cfg, ag.ddpg_buffer.sample(static_cast<std::size_t>(cfg.batch_size), ag.rng));
      rec.critic_loss += l.critic;
      rec.actor_loss += l.actor;
      ++train_steps;
    }
    done = out.done;
    state = std::move(out.next_state);
    x = xn;
  }
  if (train_steps > 0) {
    rec.critic_loss /= train_steps;
    rec.actor_loss /= train_steps;
  }
  rec.override_rate = static_cast<double>(overrides) / static_cast<double>(rec.rewards.size());

  const std::size_t m = std::min(rec.rewards.size(), static_cast<std::size_t>(cfg.convergence_window));
  rec.outer_reward = std::accumulate(rec.rewards.end() - static_cast<std::ptrdiff_t>(m), rec.rewards.end(), 0.0) /
                     static_cast<double>(m);
  ModeTransition mt;
  mt.state = x0;
  mt.mode = mode_index(rec.modes);
  mt.reward = rec.outer_reward;
  mt.next_state = x;
  mt.done = true;
  ag.dqn_buffer.push(std::move(mt));
  rec.dqn_loss = dqn_train_step(ag, cfg, ag.dqn_buffer.sample(static_cast<std::size_t>(cfg.batch_size), ag.rng));

  rec.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

std::vector<EpisodeRecord> train(const Environment& env, const AgentConfig& cfg, TrainMode mode,
                                 int episodes, std::uint64_t seed,
                                 const std::function<void(const EpisodeRecord&)>& on_episode,
                                 Agents* final_agents) {
  if (episodes < 0) throw DomainError("train: episodes must be >= 0");
  Agents ag = Agents::create(env, cfg, seed);
  std::vector<EpisodeRecord> records;
  records.reserve(static_cast<std::size_t>(episodes));
  for (int e = 0; e < episodes; ++e) {
    records.push_back(run_episode(env, ag, cfg, mode, e, derive_seed(seed, 1000003ULL + static_cast<std::uint64_t>(e))));
    if (on_episode) on_episode(records.back());
  }
  if (final_agents != nullptr) *final_agents = std::move(ag);
  return records;
}

}  // namespace hrelay
