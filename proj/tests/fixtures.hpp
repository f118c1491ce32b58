#pragma once

#include <random>

#include "hrelay/network_model.hpp"

namespace fixture {

using namespace hrelay;

inline Topology topology(int antennas, int relays) {
  Topology tp = Topology::default_layout().with_relays(relays);
  tp.antennas = antennas;
  return tp;
}

/// Enhanced channels of a seeded draw; passive relays co-phased.
inline EnhancedChannels enhanced(std::uint64_t seed, int antennas, const ModeVector& modes, double le_db = 35.0) {
  PathLossModel pl;
  pl.direct_extra_attenuation_db = le_db;
  const auto ch = generate_channels(topology(antennas, static_cast<int>(modes.size())), pl, seed);
  return enhance_channels(ch, RelayConfig{modes, passive_phases(ch, modes, 0.5), 0.5});
}

inline CVector random_unit(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  CVector w(k);
  for (int i = 0; i < k; ++i) w(i) = Complex(d(rng), d(rng));
  return w / w.norm();
}

}  // namespace fixture
