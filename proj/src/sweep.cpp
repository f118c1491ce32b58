#include "hrelay/sweep.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace hrelay {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

OptimizedCell optimize_modes(const ChannelRealization& ch, const LinkBudget& budget, double gamma_max,
                             const LowerBoundOptions& opts) {
  const int n = ch.relay_count();
  OptimizedCell best;
  best.reward = -1.0;
  for (std::uint32_t idx = 0; idx < (1u << n); ++idx) {
    RelayConfig rc;
    rc.modes = modes_from_index(idx, n);
    rc.phases = passive_phases(ch, rc.modes, gamma_max);
    rc.gamma_max = gamma_max;
    const EnhancedChannels enh = enhance_channels(ch, rc);
    const LowerBoundResult lb = solve_lower_bound(enh, budget, opts);
    if (lb.achieved > best.reward) {
      best.reward = lb.achieved;
      best.modes = rc.modes;
      best.t = lb.t_opt;
    }
  }
  return best;
}

std::vector<ResultRow> episode_rows(const std::vector<EpisodeRecord>& records, const std::string& scheme,
                                    double p_t_dbm, double le_db, int n, std::uint64_t seed,
                                    bool record_runtime) {
  std::vector<ResultRow> rows;
  for (const auto& rec : records) {
    ResultRow r;
    r.scheme = scheme;
    r.p_t_dbm = p_t_dbm;
    r.le_db = le_db;
    r.n = n;
    r.seed = seed;
    r.episode = rec.episode;
    r.reward_mean = rec.mean_reward();
    r.reward_std = std_of(rec.rewards);
    r.runtime_ms = record_runtime ? rec.runtime_ms : 0.0;
    r.modes = rec.modes;
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void static_cell(const ExperimentConfig& cfg, const EnvConfig& ec, ResultRow& row) {
  const int n = row.n;
  std::vector<double> rewards;
  std::vector<int> passive_votes(static_cast<std::size_t>(n), 0);
  double total_ms = 0.0;
  for (int d = 0; d < cfg.draws; ++d) {
    const std::uint64_t draw_seed = derive_seed(row.seed, static_cast<std::uint64_t>(d));
    const ChannelRealization ch = generate_channels(ec.topology, ec.path_loss, draw_seed);
    const auto t0 = Clock::now();
    if (row.scheme == "optimized") {
      const OptimizedCell best = optimize_modes(ch, ec.budget, ec.gamma_max, cfg.agent.lower_bound);
      rewards.push_back(best.reward);
      for (int i = 0; i < n; ++i) passive_votes[static_cast<std::size_t>(i)] += best.modes[static_cast<std::size_t>(i)] ? 1 : 0;
    } else {
      std::mt19937_64 rng(derive_seed(draw_seed, 0xba5e));
      rewards.push_back(run_baseline(parse_baseline(row.scheme), ch, ec.budget, ec.gamma_max, rng).reward);
    }
    total_ms += ms_since(t0);
  }
  row.reward_mean = mean_of(rewards);
  row.reward_std = std_of(rewards);
  row.runtime_ms = cfg.record_runtime ? total_ms / cfg.draws : 0.0;
  row.modes.assign(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n; ++i) row.modes[static_cast<std::size_t>(i)] = 2 * passive_votes[static_cast<std::size_t>(i)] > cfg.draws;
}

void agent_cell(const ExperimentConfig& cfg, const EnvConfig& ec, ResultRow& row) {
  const Environment env(ec);
  const auto records = train(env, cfg.agent, parse_train_mode(row.scheme), cfg.episodes, row.seed);
  const std::size_t w = std::min(records.size(), static_cast<std::size_t>(cfg.agent_window));
  std::vector<double> tail;
  double ms = 0.0;
  for (std::size_t i = records.size() - w; i < records.size(); ++i) tail.push_back(records[i].mean_reward());
  for (const auto& r : records) ms += r.runtime_ms;
  row.episode = cfg.episodes;
  row.reward_mean = mean_of(tail);
  row.reward_std = std_of(tail);
  row.runtime_ms = cfg.record_runtime ? ms / static_cast<double>(records.size()) : 0.0;
  row.modes = records.back().modes;
}

}  // namespace

std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg, const std::function<void(const ResultRow&)>& on_row) {
  cfg.validate();
  std::vector<ResultRow> rows;
  for (const auto& scheme : cfg.schemes)
    for (double p : cfg.p_t_dbm)
      for (double le : cfg.le_db)
        for (int n : cfg.relay_counts)
          for (std::uint64_t seed : cfg.seeds) {
            ResultRow row;
            row.scheme = scheme;
            row.p_t_dbm = p;
            row.le_db = le;
            row.n = n;
            row.seed = seed;
            try {
              const EnvConfig ec = cfg.env_config(p, le, n);
              if (scheme == "model_free" || scheme == "simplified" || scheme == "full_opt")
                agent_cell(cfg, ec, row);
              else
                static_cell(cfg, ec, row);
            } catch (const std::exception& e) {
              row.reward_mean = row.reward_std = std::numeric_limits<double>::quiet_NaN();
              row.modes.assign(static_cast<std::size_t>(n), false);
              row.error = e.what();
            }
            if (on_row) on_row(row);
            rows.push_back(std::move(row));
          }
  return rows;
}

}  // namespace hrelay
