#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hrelay/baselines.hpp"
#include "hrelay/config.hpp"

namespace hrelay {

struct ResultRow {
  std::string scheme;
  double p_t_dbm = 0.0;
  double le_db = 0.0;
  int n = 0;
  std::uint64_t seed = 0;
  int episode = 0;
  double reward_mean = 0.0;
  double reward_std = 0.0;
  double runtime_ms = 0.0;
  ModeVector modes;  // true = passive
  std::string error;  // empty unless the cell failed; not written to CSV
};

/// Best mode vector by exhaustive search: passive phases co-phased, each
/// candidate scored by the executable throughput of its lower-bound witness.
struct OptimizedCell {
  ModeVector modes;
  double reward = 0.0;
  double t = 0.0;
};
OptimizedCell optimize_modes(const ChannelRealization& ch, const LinkBudget& budget, double gamma_max,
                             const LowerBoundOptions& opts);

/// One row per (scheme, p_t, L_e, N, seed), in that nesting order. A failing
/// cell yields a row with NaN reward and a message in `error`.
std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg,
                                 const std::function<void(const ResultRow&)>& on_row = {});

/// Per-episode rows of a training run.
std::vector<ResultRow> episode_rows(const std::vector<EpisodeRecord>& records, const std::string& scheme,
                                    double p_t_dbm, double le_db, int n, std::uint64_t seed,
                                    bool record_runtime);

double mean_of(const std::vector<double>& v);
/// Population standard deviation (0 for fewer than two values).
double std_of(const std::vector<double>& v);

// CSV with header scheme,p_t_dbm,L_e_db,N,seed,episode,reward_mean,reward_std,runtime_ms,modes
extern const char* const kCsvHeader;
std::string modes_to_bits(const ModeVector& modes);
ModeVector bits_to_modes(const std::string& bits);
std::string format_row(const ResultRow& row);
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> read_csv(const std::string& path);

}  // namespace hrelay
