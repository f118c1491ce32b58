#pragma once

#include <cstdint>
#include <vector>

#include "hrelay/numerics.hpp"

namespace hrelay {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point& a, const Point& b);

struct Topology {
  Point hap;
  Point receiver;
  std::vector<Point> relays;
  int antennas = 3;

  int relay_count() const { return static_cast<int>(relays.size()); }
  // Throws DomainError on coincident nodes or K < 1.
  void validate() const;

  // HAP at (0,0), receiver at (10,0), relays between them.
  static Topology default_layout();
  // First n relays of `*this`.
  Topology with_relays(int n) const;
};

struct PathLossModel {
  double unit_loss_db = 25.0;
  double exponent = 2.0;
  double noise_dbm = -80.0;
  double direct_extra_attenuation_db = 0.0;  // applied to the HAP->receiver link only

  void validate() const;
  double noise_power_mw() const;
  /// sqrt(path gain / noise) for a link of length d with extra loss.
  double normalized_amplitude(double d, double extra_db = 0.0) const;
};

double dbm_to_mw(double dbm);

/// One block-fading draw. Every channel is divided by the noise amplitude so
/// single-link SNRs use unit noise. Cascaded (reflected or relayed) products
/// of two normalized channels pick up one factor `noise_amplitude` to stay in
/// the same unit system.
struct ChannelRealization {
  CVector f0;                 // HAP -> receiver, K
  std::vector<CVector> f;     // HAP -> relay n, K each
  CVector g;                  // relay n -> receiver, N
  CMatrix z;                  // relay <-> relay, N x N symmetric, zero diagonal
  double noise_amplitude = 1.0;

  int antennas() const { return static_cast<int>(f0.size()); }
  int relay_count() const { return static_cast<int>(f.size()); }
  void validate() const;
};

using ModeVector = std::vector<bool>;  // true = passive (backscatter)

std::uint32_t mode_index(const ModeVector& modes);
ModeVector modes_from_index(std::uint32_t index, int relays);
int count_active(const ModeVector& modes);

struct RelayConfig {
  ModeVector modes;
  std::vector<double> phases;  // radians in [0, 2pi]
  double gamma_max = 0.5;

  void validate(int relays) const;
};

/// Effective channels seen by the active relays once passive relays reflect.
struct EnhancedChannels {
  CVector f0_hat;
  std::vector<int> active;            // relay ids, ascending
  std::vector<CVector> f_hat;         // parallel to `active`
  std::vector<Complex> g_hat;         // parallel to `active`
  double noise_power = 1.0;           // noise_amplitude^2 of the source realization

  int antennas() const { return static_cast<int>(f0_hat.size()); }
  int active_count() const { return static_cast<int>(active.size()); }
  // Position of relay `id` in `active`, or -1.
  int slot_of(int relay_id) const;
};

ChannelRealization generate_channels(const Topology& topology, const PathLossModel& path_loss,
                                     std::uint64_t seed);

EnhancedChannels enhance_channels(const ChannelRealization& ch, const RelayConfig& cfg);

/// HAP -> relay channel for any relay (active or passive), reflections from
/// the other passive relays included. Used for energy harvesting.
CVector incident_channel(const ChannelRealization& ch, const RelayConfig& cfg, int relay);

/// Phases that co-phase every passive reflection with the direct channel.
std::vector<double> cophase_passive(const ChannelRealization& ch, const ModeVector& modes,
                                    double gamma_max);

/// cophase_passive, or all-zero phases when no relay is passive.
std::vector<double> passive_phases(const ChannelRealization& ch, const ModeVector& modes,
                                   double gamma_max);

}  // namespace hrelay
