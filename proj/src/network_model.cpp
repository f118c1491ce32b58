#include "hrelay/network_model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace hrelay {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_phase(double theta) {
  double w = std::fmod(theta, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

Complex reflection(double gamma_max, double theta) { return std::polar(gamma_max, theta); }

}  // namespace

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

void Topology::validate() const {
  if (antennas < 1) throw DomainError("topology: antennas must be >= 1");
  std::vector<Point> nodes{hap, receiver};
  nodes.insert(nodes.end(), relays.begin(), relays.end());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j)
      if (!(distance(nodes[i], nodes[j]) > 0.0))
        throw DomainError("topology: nodes " + std::to_string(i) + " and " + std::to_string(j) +
                          " coincide");
}

Topology Topology::default_layout() {
  Topology t;
  t.hap = {0.0, 0.0};
  t.receiver = {10.0, 0.0};
  t.relays = {{4.0, 1.0}, {4.0, -1.0}, {5.0, 0.0}, {6.0, 1.0}, {6.0, -1.0}};
  t.antennas = 3;
  return t;
}

Topology Topology::with_relays(int n) const {
  if (n < 0 || n > relay_count()) throw DomainError("topology: relay count out of range");
  Topology t = *this;
  t.relays.resize(static_cast<std::size_t>(n));
  return t;
}

void PathLossModel::validate() const {
  if (!(exponent > 0.0)) throw DomainError("path loss: exponent must be > 0");
  if (!(unit_loss_db >= 0.0)) throw DomainError("path loss: unit loss must be >= 0 dB");
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

double PathLossModel::noise_power_mw() const { return dbm_to_mw(noise_dbm); }

double PathLossModel::normalized_amplitude(double d, double extra_db) const {
  const double loss_db = unit_loss_db + 10.0 * exponent * std::log10(d) + extra_db;
  return std::sqrt(std::pow(10.0, -loss_db / 10.0) / noise_power_mw());
}

void ChannelRealization::validate() const {
  const int k = antennas();
  const int n = relay_count();
  if (k < 1) throw StructuralError("channels: empty f0");
  for (const auto& fn : f)
    if (fn.size() != k) throw StructuralError("channels: relay channel dimension != K");
  if (g.size() != n || z.rows() != n || z.cols() != n)
    throw StructuralError("channels: relay dimension mismatch");
}

std::uint32_t mode_index(const ModeVector& modes) {
  std::uint32_t idx = 0;
  for (std::size_t k = 0; k < modes.size(); ++k)
    if (modes[k]) idx |= (1u << k);
  return idx;
}

ModeVector modes_from_index(std::uint32_t index, int relays) {
  ModeVector m(static_cast<std::size_t>(relays));
  for (int k = 0; k < relays; ++k) m[static_cast<std::size_t>(k)] = ((index >> k) & 1u) != 0;
  return m;
}

int count_active(const ModeVector& modes) {
  int n = 0;
  for (bool passive : modes) n += passive ? 0 : 1;
  return n;
}

void RelayConfig::validate(int relays) const {
  if (static_cast<int>(modes.size()) != relays || static_cast<int>(phases.size()) != relays)
    throw StructuralError("relay config: dimension mismatch with channels");
  if (!(gamma_max >= 0.0 && gamma_max <= 1.0))
    throw DomainError("relay config: reflection magnitude outside [0,1]");
  for (double th : phases)
    if (!(th >= 0.0 && th <= kTwoPi)) throw DomainError("relay config: phase outside [0, 2pi]");
}

int EnhancedChannels::slot_of(int relay_id) const {
  for (std::size_t i = 0; i < active.size(); ++i)
    if (active[i] == relay_id) return static_cast<int>(i);
  return -1;
}

ChannelRealization generate_channels(const Topology& topology, const PathLossModel& path_loss,
                                     std::uint64_t seed) {
  topology.validate();
  path_loss.validate();
  const int k = topology.antennas;
  const int n = topology.relay_count();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  auto cn = [&]() {
    const double re = normal(rng);
    const double im = normal(rng);
    return Complex(re, im);
  };

  ChannelRealization ch;
  ch.noise_amplitude = std::sqrt(path_loss.noise_power_mw());
  ch.f0.resize(k);
  const double a0 = path_loss.normalized_amplitude(distance(topology.hap, topology.receiver),
                                                   path_loss.direct_extra_attenuation_db);
  for (int i = 0; i < k; ++i) ch.f0(i) = a0 * cn();

  ch.f.assign(static_cast<std::size_t>(n), CVector(k));
  ch.g.resize(n);
  ch.z = CMatrix::Zero(n, n);
  // Draw order is per relay so the channels of the first m relays do not
  // depend on how many relays follow.
  for (int r = 0; r < n; ++r) {
    const Point& pos = topology.relays[static_cast<std::size_t>(r)];
    const double af = path_loss.normalized_amplitude(distance(topology.hap, pos));
    for (int i = 0; i < k; ++i) ch.f[static_cast<std::size_t>(r)](i) = af * cn();
    ch.g(r) = path_loss.normalized_amplitude(distance(pos, topology.receiver)) * cn();
    for (int m = 0; m < r; ++m) {
      const double az =
          path_loss.normalized_amplitude(distance(pos, topology.relays[static_cast<std::size_t>(m)]));
      const Complex h = az * cn();
      ch.z(m, r) = h;
      ch.z(r, m) = h;
    }
  }
  return ch;
}

EnhancedChannels enhance_channels(const ChannelRealization& ch, const RelayConfig& cfg) {
  ch.validate();
  const int n = ch.relay_count();
  cfg.validate(n);
  const double sigma = ch.noise_amplitude;

  EnhancedChannels out;
  out.noise_power = sigma * sigma;
  out.f0_hat = ch.f0;
  for (int k = 0; k < n; ++k) {
    if (!cfg.modes[static_cast<std::size_t>(k)]) continue;
    const Complex gamma = reflection(cfg.gamma_max, cfg.phases[static_cast<std::size_t>(k)]);
    out.f0_hat += (sigma * ch.g(k) * gamma) * ch.f[static_cast<std::size_t>(k)];
  }
  for (int r = 0; r < n; ++r) {
    if (cfg.modes[static_cast<std::size_t>(r)]) continue;
    CVector f_hat = ch.f[static_cast<std::size_t>(r)];
    Complex g_hat = ch.g(r);
    for (int k = 0; k < n; ++k) {
      if (k == r || !cfg.modes[static_cast<std::size_t>(k)]) continue;
      const Complex gamma = reflection(cfg.gamma_max, cfg.phases[static_cast<std::size_t>(k)]);
      f_hat += (sigma * ch.z(k, r) * gamma) * ch.f[static_cast<std::size_t>(k)];
      g_hat += sigma * ch.z(r, k) * gamma * ch.g(k);
    }
    out.active.push_back(r);
    out.f_hat.push_back(std::move(f_hat));
    out.g_hat.push_back(g_hat);
  }
  return out;
}

CVector incident_channel(const ChannelRealization& ch, const RelayConfig& cfg, int relay) {
  ch.validate();
  cfg.validate(ch.relay_count());
  if (relay < 0 || relay >= ch.relay_count()) throw StructuralError("incident_channel: bad relay id");
  CVector f = ch.f[static_cast<std::size_t>(relay)];
  for (int k = 0; k < ch.relay_count(); ++k) {
    if (k == relay || !cfg.modes[static_cast<std::size_t>(k)]) continue;
    const Complex gamma = reflection(cfg.gamma_max, cfg.phases[static_cast<std::size_t>(k)]);
    f += (ch.noise_amplitude * ch.z(k, relay) * gamma) * ch.f[static_cast<std::size_t>(k)];
  }
  return f;
}

namespace {

// Exact per-coordinate maximization of ||base + sum_k e^{j theta_k} v_k||,
// swept until no phase moves.
void coordinate_ascent(const CVector& base, const std::vector<CVector>& terms,
                       std::vector<double>& theta) {
  CVector total = base;
  for (std::size_t k = 0; k < terms.size(); ++k) total += std::polar(1.0, theta[k]) * terms[k];
  for (int sweep = 0; sweep < 64; ++sweep) {
    double moved = 0.0;
    for (std::size_t k = 0; k < terms.size(); ++k) {
      const CVector rest = total - std::polar(1.0, theta[k]) * terms[k];
      const Complex c = hdot(rest, terms[k]);
      const double next = std::abs(c) > 0.0 ? wrap_phase(-std::arg(c)) : theta[k];
      moved = std::max(moved, std::abs(std::remainder(next - theta[k], kTwoPi)));
      theta[k] = next;
      total = rest + std::polar(1.0, theta[k]) * terms[k];
    }
    if (moved < 1e-13) break;
  }
}

double combined_norm(const CVector& base, const std::vector<CVector>& terms,
                     const std::vector<double>& theta) {
  CVector total = base;
  for (std::size_t k = 0; k < terms.size(); ++k) total += std::polar(1.0, theta[k]) * terms[k];
  return total.norm();
}

}  // namespace

std::vector<double> cophase_passive(const ChannelRealization& ch, const ModeVector& modes,
                                    double gamma_max) {
  ch.validate();
  const int n = ch.relay_count();
  if (static_cast<int>(modes.size()) != n) throw StructuralError("cophase_passive: mode size");
  std::vector<int> passive;
  for (int k = 0; k < n; ++k)
    if (modes[static_cast<std::size_t>(k)]) passive.push_back(k);
  if (passive.empty()) throw DegenerateInputError("cophase_passive: no passive relays");

  std::vector<CVector> terms;
  for (int k : passive)
    terms.push_back((ch.noise_amplitude * gamma_max * ch.g(k)) * ch.f[static_cast<std::size_t>(k)]);

  // Greedy pass in relay order.
  std::vector<double> greedy(passive.size(), 0.0);
  CVector partial = ch.f0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const Complex c = hdot(partial, terms[i]);
    greedy[i] = std::abs(c) > 0.0 ? wrap_phase(-std::arg(c)) : 0.0;
    partial += std::polar(1.0, greedy[i]) * terms[i];
  }
  coordinate_ascent(ch.f0, terms, greedy);

  // Ascent from all-zero phases never ends below the all-zero norm.
  std::vector<double> from_zero(passive.size(), 0.0);
  coordinate_ascent(ch.f0, terms, from_zero);
  const std::vector<double>& best =
      combined_norm(ch.f0, terms, from_zero) > combined_norm(ch.f0, terms, greedy) ? from_zero
                                                                                    : greedy;

  std::vector<double> phases(static_cast<std::size_t>(n), 0.0);
  for (std::size_t i = 0; i < passive.size(); ++i)
    phases[static_cast<std::size_t>(passive[i])] = best[i];
  return phases;
}

std::vector<double> passive_phases(const ChannelRealization& ch, const ModeVector& modes,
                                   double gamma_max) {
  if (count_active(modes) == static_cast<int>(modes.size()))
    return std::vector<double>(modes.size(), 0.0);
  return cophase_passive(ch, modes, gamma_max);
}

}  // namespace hrelay
