#include <doctest.h>

#include <map>

#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "hrelay/baselines.hpp"
#include "hrelay/drl.hpp"
#include "oracles.hpp"

using namespace hrelay;

namespace {

EnvConfig env_config(int k = 3, int n = 5, int length = 5) {
  EnvConfig c;
  c.topology = fixture::topology(k, n);
  c.budget = LinkBudget{1.0, 0.6};
  c.episode_length = length;
  return c;
}

// Network whose output is the constant `q` regardless of input.
Net constant_net(int inputs, const Eigen::VectorXd& q) {
  return Net({Net::Layer{Eigen::MatrixXd::Zero(q.size(), inputs), q, Activation::identity}});
}

TransitionSample sample(const Agents& ag, std::mt19937_64& rng, int f, int a, int n) {
  std::normal_distribution<double> d(0.0, 1.0);
  TransitionSample s;
  s.state = Eigen::VectorXd::NullaryExpr(f, [&]() { return d(rng); });
  s.next_state = Eigen::VectorXd::NullaryExpr(f, [&]() { return d(rng); });
  s.action = Eigen::VectorXd::NullaryExpr(a, [&]() { return d(rng); });
  s.modes = modes_from_index(static_cast<std::uint32_t>(rng() % (1u << n)), n);
  s.reward = std::abs(d(rng));
  (void)ag;
  return s;
}

std::vector<const TransitionSample*> ptrs(const std::vector<TransitionSample>& v) {
  std::vector<const TransitionSample*> out;
  for (const auto& s : v) out.push_back(&s);
  return out;
}

}  // namespace

TEST_CASE("replay buffer") {
  ReplayBuffer<int> b(3);
  for (int i = 0; i < 5; ++i) b.push(i);
  CHECK(b.size() == 3);
  CHECK(b[0] == 2);
  CHECK(b[2] == 4);
  std::mt19937_64 rng(1);
  auto s = b.sample(10, rng);
  CHECK(s.size() == 3);
  std::map<int, int> seen;
  for (int k = 0; k < 3000; ++k) {
    auto two = b.sample(2, rng);
    REQUIRE(two.size() == 2);
    CHECK(*two[0] != *two[1]);
    ++seen[*two[0]];
  }
  for (int v = 2; v <= 4; ++v) CHECK(seen[v] == doctest::Approx(1000).epsilon(0.1));
  CHECK_THROWS_AS(ReplayBuffer<int>(0), DomainError);
}

TEST_CASE("dqn_select_modes") {
  std::mt19937_64 rng(2);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(32);
  q(5) = 1.0;
  const Net net = constant_net(4, q);
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(4);
  CHECK(dqn_select_modes(net, x, 0.0, rng) == ModeVector{true, false, true, false, false});

  q(9) = 1.0;
  CHECK(mode_index(dqn_select_modes(constant_net(4, q), x, 0.0, rng)) == 5);

  std::vector<int> counts(32, 0);
  for (int k = 0; k < 10000; ++k) ++counts[mode_index(dqn_select_modes(net, x, 1.0, rng))];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - 312.5) * (c - 312.5) / 312.5;
  CHECK(chi2 < 61.1);  // 31 degrees of freedom, p = 0.001

  CHECK_THROWS_AS(dqn_select_modes(constant_net(4, Eigen::VectorXd::Zero(3)), x, 0.0, rng), StructuralError);
}

TEST_CASE("ddpg_act") {
  const Net actor({76, 16, 18}, {Activation::relu, Activation::identity}, 3);
  std::mt19937_64 rng(3);
  const Eigen::VectorXd in = Eigen::VectorXd::LinSpaced(76, -1.0, 1.0);
  const auto a = ddpg_act(actor, in, 0.0, rng);
  CHECK(a.size() == 18);
  CHECK(ddpg_act(actor, in, 0.0, rng) == a);
  double ss = 0.0;
  long n = 0;
  while (n < 100000) {
    const Eigen::VectorXd d = ddpg_act(actor, in, 0.3, rng) - a;
    ss += d.squaredNorm();
    n += d.size();
  }
  CHECK(std::sqrt(ss / n) == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("merge_targets") {
  auto m = merge_targets(1.0, 1.2);
  CHECK(m.use_optimizer);
  CHECK(*m.override_target == 1.2);
  m = merge_targets(1.2, 1.0);
  CHECK_FALSE(m.use_optimizer);
  CHECK_FALSE(m.override_target);
  m = merge_targets(1.0, 1.0);
  CHECK_FALSE(m.use_optimizer);
}

TEST_CASE("optimized_proposal") {
  const Environment env(env_config());
  std::mt19937_64 rng(4);
  const LowerBoundOptions opts;

  // All passive: only the enhanced direct channel carries data.
  EnvState s = env.reset(1);
  const ModeVector passive(5, true);
  auto p = optimized_proposal(env, s, passive, TrainMode::full_opt, 0.25, opts);
  REQUIRE(p.ok);
  const auto enh = enhance_channels(s.channels, p.action.relay_config(env.config().gamma_max));
  CHECK(enh.active_count() == 0);
  CHECK(p.reward == doctest::Approx(p.action.t * std::log2(1.0 + oracle::gamma1(enh, p.action.w1, 1.0) +
                                                          oracle::sq(enh.f0_hat))).epsilon(1e-12));
  CHECK_THROWS_AS(optimized_proposal(env, s, passive, TrainMode::model_free, 0.25, opts), DomainError);

  // The simplified variant keeps the hinted t.
  const auto ps = optimized_proposal(env, s, ModeVector{false, true, false, true, false}, TrainMode::simplified, 0.2, opts);
  REQUIRE(ps.ok);
  CHECK(ps.action.t == doctest::Approx(0.2).epsilon(1e-9));

  // Rewards are re-evaluated on the exact decoded action.
  int beats_max_dl = 0;
  for (int k = 0; k < 100; ++k) {
    EnvState st = env.reset(100 + k);
    std::fill(st.energy.begin(), st.energy.end(), env.config().e_max);
    const ModeVector active(5, false);
    const auto prop = optimized_proposal(env, st, active, TrainMode::full_opt, 0.25, opts);
    REQUIRE(prop.ok);
    CHECK(decode_action(prop.raw, active, 3).t == prop.action.t);
    CHECK(env.evaluate(st, decode_action(prop.raw, active, 3)) == prop.reward);
    const auto base = run_baseline(BaselineScheme::max_dl, st.channels, env.config().budget, env.config().gamma_max, rng);
    if (prop.reward >= env.evaluate(st, base.action)) ++beats_max_dl;
  }
  CHECK(beats_max_dl >= 95);

  // Never above the problem-(4) optimum, estimated on K = 2, N = 1.
  auto c1 = env_config(2, 1);
  c1.path_loss.direct_extra_attenuation_db = 30.0;
  const Environment small(c1);
  for (int k = 0; k < 10; ++k) {
    EnvState st = small.reset(300 + k);
    st.energy = {small.config().e_max};
    const auto prop = optimized_proposal(small, st, ModeVector{false}, TrainMode::full_opt, 0.25, opts);
    REQUIRE(prop.ok);
    const auto e = enhance_channels(st.channels, prop.action.relay_config(small.config().gamma_max));
    CHECK(prop.reward <= oracle::problem4_single(e, 1.0, 0.6) * (1.0 + 1e-3));
  }
}

TEST_CASE("ddpg targets") {
  const Environment env(env_config());
  AgentConfig cfg;
  Agents ag = Agents::create(env, cfg, 5);
  std::mt19937_64 rng(5);
  std::vector<TransitionSample> batch;
  for (int i = 0; i < 6; ++i) batch.push_back(sample(ag, rng, 71, 18, 5));
  batch[1].optimizer_flag = true;
  batch[1].optimizer_target = batch[1].reward + 0.5;
  batch[2].optimizer_flag = true;
  batch[2].optimizer_target = batch[2].reward - 0.5;

  for (auto& s : batch) s.done = true;
  auto y = ddpg_targets(ag, cfg, ptrs(batch));
  for (int i = 0; i < 6; ++i) {
    const auto& s = batch[static_cast<std::size_t>(i)];
    CHECK(y(i) == (s.optimizer_flag ? std::max(s.reward, *s.optimizer_target) : s.reward));
  }

  for (auto& s : batch) s.done = false;
  AgentConfig zero = cfg;
  zero.gamma = 0.0;
  y = ddpg_targets(ag, zero, ptrs(batch));
  CHECK(y(0) == batch[0].reward);
  CHECK(y(1) == *batch[1].optimizer_target);
  CHECK(y(2) == batch[2].reward);

  // Bootstrapped targets from the target networks.
  y = ddpg_targets(ag, cfg, ptrs(batch));
  for (int i = 0; i < 6; ++i) {
    const auto& s = batch[static_cast<std::size_t>(i)];
    const Eigen::VectorXd an = ag.actor_target.forward_one(actor_input(s.next_state, s.modes));
    const double qn = ag.critic_target.forward_one(critic_input(s.next_state, s.modes, an))(0);
    double expect = s.reward + cfg.gamma * qn;
    if (s.optimizer_flag) expect = std::max(expect, *s.optimizer_target + cfg.gamma * qn);
    CHECK(y(i) == doctest::Approx(expect).epsilon(1e-12));
  }

  batch[3].optimizer_flag = true;
  CHECK_THROWS_AS(ddpg_targets(ag, cfg, ptrs(batch)), StructuralError);
}

TEST_CASE("critic loss vanishes when the critic already equals the reward") {
  const Environment env(env_config());
  AgentConfig cfg;
  Agents ag = Agents::create(env, cfg, 6);
  cfg.gamma = 0.0;
  std::mt19937_64 rng(6);
  std::vector<TransitionSample> batch;
  for (int i = 0; i < 8; ++i) {
    auto s = sample(ag, rng, 71, 18, 5);
    s.reward = ag.critic.forward_one(critic_input(s.state, s.modes, s.action))(0);
    batch.push_back(s);
  }
  const auto l = ddpg_train_step(ag, cfg, ptrs(batch));
  CHECK(l.critic == doctest::Approx(0.0).epsilon(1e-24));
}

TEST_CASE("actor gradient agrees with finite differences") {
  const Environment env(env_config());
  AgentConfig cfg;
  Agents ag = Agents::create(env, cfg, 7);
  std::mt19937_64 rng(7);
  std::vector<TransitionSample> batch;
  for (int i = 0; i < 4; ++i) batch.push_back(sample(ag, rng, 71, 18, 5));
  const auto b = ptrs(batch);
  const Eigen::VectorXd g = actor_gradient(ag.actor, ag.critic, b);

  const auto actor = gradcheck::widen(ag.actor);
  const auto critic = gradcheck::widen(ag.critic);
  auto loss = [&](const gradcheck::LMlp& act) {
    long double s = 0.0;
    for (const auto* t : b) {
      const auto in = actor_input(t->state, t->modes).cast<long double>().eval();
      const auto a = act.forward_one(in);
      Eigen::Matrix<long double, -1, 1> ci(in.size() + a.size());
      ci << in, a;
      s += critic.forward_one(ci)(0);
    }
    return -s / static_cast<long double>(b.size());
  };
  auto p = actor.parameters();
  gradcheck::LMlp probe = actor;
  std::uniform_int_distribution<Eigen::Index> pick(0, p.size() - 1);
  Eigen::VectorXd fd(500), an(500);
  const long double h = 1e-6L;
  for (int i = 0; i < 500; ++i) {
    const Eigen::Index idx = pick(rng);
    const long double keep = p(idx);
    p(idx) = keep + h;
    probe.set_parameters(p);
    const long double up = loss(probe);
    p(idx) = keep - h;
    probe.set_parameters(p);
    const long double dn = loss(probe);
    p(idx) = keep;
    fd(i) = static_cast<double>((up - dn) / (2 * h));
    an(i) = g(idx);
  }
  CHECK(fd.dot(an) / (fd.norm() * an.norm()) > 0.99);
  CHECK((fd - an).norm() <= 1e-4 * an.norm());
}

TEST_CASE("dqn_train_step") {
  const Environment env(env_config());
  AgentConfig cfg;
  cfg.dqn_sync_every = 1000;
  Agents ag = Agents::create(env, cfg, 8);
  Eigen::VectorXd qv = Eigen::VectorXd::LinSpaced(32, 0.0, 3.1);
  Eigen::VectorXd qt = Eigen::VectorXd::LinSpaced(32, 1.0, -2.1);
  ag.q = constant_net(71, qv);
  ag.q_target = constant_net(71, qt);
  ag.q_opt = Adam(ag.q.parameter_count(), cfg.lr_dqn);

  ModeTransition t;
  t.state = Eigen::VectorXd::Ones(71);
  t.next_state = Eigen::VectorXd::Zero(71);
  t.mode = 7;
  t.reward = 0.4;
  t.done = false;
  double loss = dqn_train_step(ag, cfg, {&t});
  const double td = qv(7) - (0.4 + cfg.gamma * 1.0);
  CHECK(loss == doctest::Approx(td * td).epsilon(1e-12));

  ag.q = constant_net(71, qv);
  ag.q_opt = Adam(ag.q.parameter_count(), cfg.lr_dqn);
  AgentConfig zero = cfg;
  zero.gamma = 0.0;
  loss = dqn_train_step(ag, zero, {&t});
  CHECK(loss == doctest::Approx((qv(7) - 0.4) * (qv(7) - 0.4)).epsilon(1e-12));

  // Hard sync on schedule.
  AgentConfig sync = cfg;
  sync.dqn_sync_every = 2;
  Agents fresh = Agents::create(env, sync, 9);
  ModeTransition u = t;
  u.state = Eigen::VectorXd::LinSpaced(71, -1.0, 1.0);
  dqn_train_step(fresh, sync, {&u});
  CHECK(fresh.q_target.parameters() != fresh.q.parameters());
  dqn_train_step(fresh, sync, {&u});
  std::mt19937_64 rng(9);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    const Eigen::VectorXd probe = Eigen::VectorXd::NullaryExpr(71, [&]() { return d(rng); });
    CHECK(fresh.q_target.forward_one(probe) == fresh.q.forward_one(probe));
  }
}

TEST_CASE("episodes") {
  const Environment env(env_config(3, 5, 6));
  AgentConfig cfg;
  cfg.batch_size = 4;

  Agents ag = Agents::create(env, cfg, 10);
  const auto mf = run_episode(env, ag, cfg, TrainMode::model_free, 0, 77);
  CHECK(mf.override_rate == 0.0);
  CHECK(mf.rewards.size() == 6);
  CHECK(ag.ddpg_buffer.size() == 6);
  CHECK(ag.dqn_buffer.size() == 1);
  CHECK(ag.dqn_buffer[0].reward == doctest::Approx(mf.mean_reward()));

  // Replaying the buffered actions reproduces the buffered rewards exactly.
  Agents full = Agents::create(env, cfg, 11);
  const auto fo = run_episode(env, full, cfg, TrainMode::full_opt, 0, 78);
  EnvState s = env.reset(78);
  for (std::size_t i = 0; i < full.ddpg_buffer.size(); ++i) {
    const auto& t = full.ddpg_buffer[i];
    CHECK(t.state == full.features(s, env.config().e_max));
    const auto out = env.step(s, decode_action(t.action, t.modes, 3));
    CHECK(out.reward == t.reward);
    CHECK(t.optimizer_flag == t.optimizer_target.has_value());
    if (t.optimizer_flag) CHECK(*t.optimizer_target == t.reward);
    s = out.next_state;
  }
  CHECK(fo.rewards.size() == 6);

  // Early in training the optimizer usually wins.
  int mostly = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Agents a = Agents::create(env, cfg, 100 + seed);
    if (run_episode(env, a, cfg, TrainMode::full_opt, 0, 500 + seed).override_rate > 0.5) ++mostly;
  }
  CHECK(mostly >= 9);

  // Determinism.
  const auto r1 = train(env, cfg, TrainMode::simplified, 3, 42);
  const auto r2 = train(env, cfg, TrainMode::simplified, 3, 42);
  REQUIRE(r1.size() == 3);
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(r1[e].rewards == r2[e].rewards);
    CHECK(r1[e].modes == r2[e].modes);
    CHECK(r1[e].override_rate == r2[e].override_rate);
    CHECK(r1[e].critic_loss == r2[e].critic_loss);
    CHECK(r1[e].dqn_loss == r2[e].dqn_loss);
  }
}

TEST_CASE("buffer capacity under training") {
  const Environment env(env_config(3, 2, 4));
  AgentConfig cfg;
  cfg.ddpg_capacity = 10;
  cfg.dqn_capacity = 3;
  cfg.batch_size = 2;
  Agents ag;
  train(env, cfg, TrainMode::model_free, 5, 3, {}, &ag);
  CHECK(ag.ddpg_buffer.size() == 10);
  CHECK(ag.dqn_buffer.size() == 3);
}

TEST_CASE("agent config") {
  AgentConfig c;
  CHECK(c.epsilon(0) == 1.0);
  CHECK(c.epsilon(100) == doctest::Approx(0.525));
  CHECK(c.epsilon(500) == 0.05);
  CHECK(c.sigma(2) == doctest::Approx(0.3 * 0.995 * 0.995));
  c.gamma = 1.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  CHECK(parse_train_mode("full_opt") == TrainMode::full_opt);
  CHECK_THROWS_AS(parse_train_mode("x"), DomainError);
}
