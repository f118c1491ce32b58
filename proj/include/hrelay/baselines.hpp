#pragma once

#include <random>
#include <string>

#include "hrelay/phy_layer.hpp"

namespace hrelay {

enum class BaselineScheme { random, max_dl, max_energy, dl_only };

std::string to_string(BaselineScheme s);
BaselineScheme parse_baseline(const std::string& s);

struct BaselineResult {
  HybridAction action;  // empty beamformers for dl_only
  double reward = 0.0;
};

/// Static (single-slot) baselines, every relay active at its harvest limit.
///   random:     w0, w1 uniform on the unit sphere, t = 0.25
///   max_dl:     w0 = w1 = unit_align(f0_hat), best t on a 0.01 grid
///   max_energy: w0 = w1 = principal eigenvector of sum_n f_n f_n^H, best t on the grid
///   dl_only:    log2(1 + p_t ||f0||^2) over the whole slot, relays absent
BaselineResult run_baseline(BaselineScheme scheme, const ChannelRealization& ch,
                            const LinkBudget& budget, double gamma_max, std::mt19937_64& rng);

/// Uniform draw on the complex unit sphere in C^k.
CVector random_unit_vector(int k, std::mt19937_64& rng);

}  // namespace hrelay
