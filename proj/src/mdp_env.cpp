#include "hrelay/mdp_env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hrelay {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSaturation = 19.0;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

CVector unit_or_first(const Eigen::Ref<const Eigen::VectorXd>& re,
                      const Eigen::Ref<const Eigen::VectorXd>& im) {
  CVector w(re.size());
  for (Eigen::Index i = 0; i < re.size(); ++i) w(i) = Complex(re(i), im(i));
  const double n = w.norm();
  if (!(n > 0.0) || !std::isfinite(n)) return CVector::Unit(re.size(), 0);
  return w / n;
}

}  // namespace

void EnvConfig::validate() const {
  topology.validate();
  path_loss.validate();
  budget.validate();
  if (!(gamma_max >= 0.0 && gamma_max <= 1.0)) throw DomainError("env: gamma_max outside [0,1]");
  if (!(energy_unit_mw > 0.0)) throw DomainError("env: energy_unit_mw must be > 0");
  if (!(e_max > 0.0)) throw DomainError("env: e_max must be > 0");
  if (!(e_init >= 0.0 && e_init <= e_max)) throw DomainError("env: e_init outside [0, e_max]");
  if (!(passive_cost >= 0.0)) throw DomainError("env: passive_cost must be >= 0");
  if (episode_length < 1) throw DomainError("env: episode_length must be >= 1");
}

int feature_length(int k, int n) { return 2 * k + 2 * k * n + 2 * n + n * (n - 1) + n; }

int action_length(int k, int n) { return 1 + 4 * k + n; }

Eigen::VectorXd encode_state(const EnvState& state, double e_max) {
  const ChannelRealization& ch = state.channels;
  const int k = ch.antennas();
  const int n = ch.relay_count();
  Eigen::VectorXd x(feature_length(k, n));
  int idx = 0;
  auto put = [&](Complex c) {
    x(idx++) = c.real();
    x(idx++) = c.imag();
  };
  for (int i = 0; i < k; ++i) put(ch.f0(i));
  for (int r = 0; r < n; ++r)
    for (int i = 0; i < k; ++i) put(ch.f[static_cast<std::size_t>(r)](i));
  for (int r = 0; r < n; ++r) put(ch.g(r));
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) put(ch.z(a, b));
  for (int r = 0; r < n; ++r) x(idx++) = state.energy[static_cast<std::size_t>(r)] / e_max;
  return x;
}

ChannelRealization decode_channels(const Eigen::VectorXd& features, int k, int n,
                                   double noise_amplitude) {
  if (features.size() != feature_length(k, n)) throw StructuralError("decode_channels: length");
  ChannelRealization ch;
  ch.noise_amplitude = noise_amplitude;
  int idx = 0;
  auto get = [&]() {
    const Complex c(features(idx), features(idx + 1));
    idx += 2;
    return c;
  };
  ch.f0.resize(k);
  for (int i = 0; i < k; ++i) ch.f0(i) = get();
  ch.f.assign(static_cast<std::size_t>(n), CVector(k));
  for (int r = 0; r < n; ++r)
    for (int i = 0; i < k; ++i) ch.f[static_cast<std::size_t>(r)](i) = get();
  ch.g.resize(n);
  for (int r = 0; r < n; ++r) ch.g(r) = get();
  ch.z = CMatrix::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      ch.z(a, b) = get();
      ch.z(b, a) = ch.z(a, b);
    }
  return ch;
}

HybridAction decode_action(const Eigen::VectorXd& raw, const ModeVector& modes, int k) {
  const int n = static_cast<int>(modes.size());
  if (raw.size() != action_length(k, n)) throw StructuralError("decode_action: raw length != 1+4K+N");
  HybridAction a;
  a.t = kTMin + (0.5 - 2.0 * kTMin) * sigmoid(raw(0));
  a.w0 = unit_or_first(raw.segment(1, k), raw.segment(1 + k, k));
  a.w1 = unit_or_first(raw.segment(1 + 2 * k, k), raw.segment(1 + 3 * k, k));
  a.modes = modes;
  a.phases.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    a.phases[static_cast<std::size_t>(i)] =
        std::clamp(kPi * (std::tanh(raw(1 + 4 * k + i)) + 1.0), 0.0, 2.0 * kPi);
  return a;
}

Eigen::VectorXd encode_action(const HybridAction& action) {
  const int k = static_cast<int>(action.w0.size());
  const int n = static_cast<int>(action.phases.size());
  if (action.w1.size() != k) throw StructuralError("encode_action: beamformer sizes differ");
  Eigen::VectorXd raw(action_length(k, n));
  const double u = std::clamp((action.t - kTMin) / (0.5 - 2.0 * kTMin), 0.0, 1.0);
  raw(0) = std::clamp(std::log(u) - std::log1p(-u), -kSaturation, kSaturation);
  raw.segment(1, k) = action.w0.real();
  raw.segment(1 + k, k) = action.w0.imag();
  raw.segment(1 + 2 * k, k) = action.w1.real();
  raw.segment(1 + 3 * k, k) = action.w1.imag();
  for (int i = 0; i < n; ++i) {
    const double c = std::clamp(action.phases[static_cast<std::size_t>(i)] / kPi - 1.0, -1.0, 1.0);
    raw(1 + 4 * k + i) = std::clamp(std::atanh(c), -kSaturation, kSaturation);
  }
  return raw;
}

Environment::Environment(EnvConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

ChannelRealization Environment::draw(std::uint64_t episode_seed, int epoch) const {
  return generate_channels(cfg_.topology, cfg_.path_loss,
                           derive_seed(episode_seed, static_cast<std::uint64_t>(epoch)));
}

EnvState Environment::reset(std::uint64_t seed) const {
  EnvState s;
  s.episode_seed = seed;
  s.epoch = 0;
  s.channels = draw(seed, 0);
  s.energy.assign(static_cast<std::size_t>(relays()), cfg_.e_init);
  return s;
}

void Environment::check_action(const HybridAction& a) const {
  const int k = antennas();
  const int n = relays();
  if (a.w0.size() != k || a.w1.size() != k) throw StructuralError("step: beamformer size != K");
  if (static_cast<int>(a.modes.size()) != n || static_cast<int>(a.phases.size()) != n)
    throw StructuralError("step: mode/phase size != N");
  if (!(a.t >= kTMin - 1e-12 && a.t <= 0.5 - kTMin + 1e-12))
    throw DomainError("step: t outside [t_min, 1/2 - t_min]");
  if (a.w0.norm() > 1.0 + 1e-9 || a.w1.norm() > 1.0 + 1e-9)
    throw DomainError("step: beamformer norm exceeds 1");
  if (!a.relay_powers.empty() && static_cast<int>(a.relay_powers.size()) != count_active(a.modes))
    throw StructuralError("step: one requested power per active relay expected");
}

std::vector<double> Environment::executed_powers(const EnvState& state, const EnhancedChannels& enh,
                                                 const HybridAction& action) const {
  std::vector<double> p = power_budgets(enh, action.w0, action.t, cfg_.budget);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!action.relay_powers.empty()) p[i] = std::min(p[i], std::max(0.0, action.relay_powers[i]));
    p[i] = std::min(p[i], state.energy[static_cast<std::size_t>(enh.active[i])] * cfg_.energy_unit_mw / action.t);
  }
  return p;
}

double Environment::evaluate(const EnvState& state, const HybridAction& action) const {
  check_action(action);
  const EnhancedChannels enh = enhance_channels(state.channels, action.relay_config(cfg_.gamma_max));
  HybridAction executed = action;
  executed.relay_powers = executed_powers(state, enh, action);
  return throughput(enh, executed, cfg_.budget);
}

StepOutcome Environment::step(const EnvState& state, const HybridAction& action) const {
  check_action(action);
  const int n = relays();
  if (static_cast<int>(state.energy.size()) != n) throw StructuralError("step: energy size != N");
  const RelayConfig rc = action.relay_config(cfg_.gamma_max);
  const EnhancedChannels enh = enhance_channels(state.channels, rc);

  HybridAction executed = action;
  executed.relay_powers = executed_powers(state, enh, action);

  StepOutcome out;
  out.reward = throughput(enh, executed, cfg_.budget);
  out.info.harvested.assign(static_cast<std::size_t>(n), 0.0);
  out.info.spent.assign(static_cast<std::size_t>(n), 0.0);
  out.info.relay_powers.assign(static_cast<std::size_t>(n), 0.0);

  const double p_t = cfg_.budget.p_t;
  const double energy_time = 1.0 - 2.0 * action.t;
  EnvState next;
  next.episode_seed = state.episode_seed;
  next.epoch = state.epoch + 1;
  next.energy.resize(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    const auto ru = static_cast<std::size_t>(r);
    const CVector f = incident_channel(state.channels, rc, r);
    const double h = cfg_.budget.eta * energy_time * p_t * state.channels.noise_amplitude *
                     state.channels.noise_amplitude * std::norm(hdot(f, action.w0)) /
                     cfg_.energy_unit_mw;
    double spend = cfg_.passive_cost;
    if (!action.modes[ru]) {
      const double p = executed.relay_powers[static_cast<std::size_t>(enh.slot_of(r))];
      out.info.relay_powers[ru] = p;
      spend = p * action.t / cfg_.energy_unit_mw;
    }
    out.info.harvested[ru] = h;
    out.info.spent[ru] = spend;
    next.energy[ru] = std::clamp(state.energy[ru] + h - spend, 0.0, cfg_.e_max);
  }
  next.channels = draw(state.episode_seed, next.epoch);
  out.done = next.epoch >= cfg_.episode_length;
  out.next_state = std::move(next);
  return out;
}

Eigen::VectorXd Environment::feature_scale() const {
  const Topology& tp = cfg_.topology;
  const PathLossModel& pl = cfg_.path_loss;
  const int k = antennas();
  const int n = relays();
  Eigen::VectorXd s(feature_size());
  int idx = 0;
  auto put = [&](double amplitude, int count) {
    const double inv = amplitude > 0.0 ? 1.0 / amplitude : 1.0;
    for (int i = 0; i < count; ++i) s(idx++) = inv;
  };
  put(pl.normalized_amplitude(distance(tp.hap, tp.receiver), pl.direct_extra_attenuation_db), 2 * k);
  for (int r = 0; r < n; ++r)
    put(pl.normalized_amplitude(distance(tp.hap, tp.relays[static_cast<std::size_t>(r)])), 2 * k);
  for (int r = 0; r < n; ++r)
    put(pl.normalized_amplitude(distance(tp.relays[static_cast<std::size_t>(r)], tp.receiver)), 2);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      put(pl.normalized_amplitude(
              distance(tp.relays[static_cast<std::size_t>(a)], tp.relays[static_cast<std::size_t>(b)])),
          2);
  for (int r = 0; r < n; ++r) s(idx++) = 1.0;
  return s;
}

}  // namespace hrelay
