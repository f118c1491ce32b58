#include "hrelay/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "hrelay/checkpoint.hpp"
#include "hrelay/sweep.hpp"

namespace hrelay {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json to_json(const CVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back({v(i).real(), v(i).imag()});
  return a;
}

CVector vector_from_json(const json& a) {
  CVector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = Complex(a[i].at(0).get<double>(), a[i].at(1).get<double>());
  return v;
}

json point_json(const Point& p) { return {p.x, p.y}; }

json instance_json(const ExperimentConfig& cfg, const ChannelRealization& ch, const EnvConfig& ec,
                   std::uint64_t seed) {
  json j;
  j["seed"] = seed;
  j["p_t_dbm"] = cfg.p_t_dbm.front();
  j["le_db"] = cfg.le_db.front();
  j["eta"] = cfg.eta;
  j["gamma_max"] = cfg.gamma_max;
  j["topology"]["antennas"] = ec.topology.antennas;
  j["topology"]["hap"] = point_json(ec.topology.hap);
  j["topology"]["receiver"] = point_json(ec.topology.receiver);
  j["topology"]["relays"] = json::array();
  for (const auto& p : ec.topology.relays) j["topology"]["relays"].push_back(point_json(p));
  json c;
  c["noise_amplitude"] = ch.noise_amplitude;
  c["f0"] = to_json(ch.f0);
  c["f"] = json::array();
  for (const auto& f : ch.f) c["f"].push_back(to_json(f));
  c["g"] = to_json(ch.g);
  c["z"] = json::array();
  for (int r = 0; r < ch.relay_count(); ++r) c["z"].push_back(to_json(ch.z.row(r).transpose()));
  j["channels"] = c;
  return j;
}

ChannelRealization channels_from_json(const json& c) {
  ChannelRealization ch;
  ch.noise_amplitude = c.at("noise_amplitude").get<double>();
  ch.f0 = vector_from_json(c.at("f0"));
  for (const auto& f : c.at("f")) ch.f.push_back(vector_from_json(f));
  ch.g = vector_from_json(c.at("g"));
  const int n = static_cast<int>(ch.f.size());
  ch.z = CMatrix::Zero(n, n);
  for (int r = 0; r < n; ++r) ch.z.row(r) = vector_from_json(c.at("z").at(static_cast<std::size_t>(r))).transpose();
  ch.validate();
  return ch;
}

struct RunDir {
  fs::path root;
  fs::path checkpoints;
};

RunDir make_run_dir(const ExperimentConfig& cfg, const std::string& out, const std::string& config_text) {
  RunDir d;
  d.root = fs::path(out.empty() ? cfg.out_dir : out) / cfg.run_id;
  d.checkpoints = d.root / "checkpoints";
  fs::create_directories(d.checkpoints);
  std::ofstream os(d.root / "config.copy", std::ios::binary);
  os << config_text;
  if (!os) throw std::runtime_error("cannot write " + (d.root / "config.copy").string());
  return d;
}

void save_adam(const fs::path& path, const Adam& st) {
  std::ofstream os(path, std::ios::binary);
  write_adam(os, st);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hybrid relay network simulator: lower bounds, H-DDPG training, baselines and sweeps"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string mode_name;
  std::string instance_path;
  std::string scheme_name;
  std::string modes_bits;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Config file (INI sections: scenario, channel, link, env, training, solver, sweep, output)");
    sub->add_option("--seed", seed, "Seed (u64); overrides the config's first seed");
    sub->add_option("--out", out_dir, "Output directory; results go to <out>/<run-id>/");
  };
  CLI::App* gen = app.add_subcommand("gen-topology", "Write a channel instance (topology + one draw) as JSON");
  add_common(gen);
  CLI::App* lb = app.add_subcommand("lower-bound", "Run the polyblock lower bound on an instance, print JSON");
  add_common(lb);
  lb->add_option("--instance", instance_path, "Instance JSON from gen-topology (default: draw from config and seed)");
  lb->add_option("--modes", modes_bits, "Relay modes as a little-endian bitstring, 1 = passive (default all active)");
  CLI::App* tr = app.add_subcommand("train", "Train H-DDPG on the first scenario cell");
  add_common(tr);
  tr->add_option("--mode", mode_name, "model_free | simplified | full_opt (default from config)")
      ->check(CLI::IsMember({"model_free", "simplified", "full_opt"}));
  CLI::App* bl = app.add_subcommand("baseline", "Evaluate baseline schemes over the config's sweep grid");
  add_common(bl);
  bl->add_option("--scheme", scheme_name, "random | max_dl | max_energy | dl_only (default: all four)")
      ->check(CLI::IsMember({"random", "max_dl", "max_energy", "dl_only"}));
  CLI::App* sw = app.add_subcommand("sweep", "Run the full sweep (scheme x p_t x L_e x N x seed)");
  add_common(sw);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Prints help for --help, or the error followed by usage.
    if (app.exit(e, out, err) == 0) return 0;
    err << app.help();
    return 2;
  }

  ExperimentConfig cfg;
  std::string config_text;
  try {
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw ConfigError("config: cannot open " + config_path);
      std::stringstream ss;
      ss << is.rdbuf();
      config_text = ss.str();
      cfg = parse_config(config_text);
    }
    if (seed) cfg.seeds = {*seed};
    if (!mode_name.empty()) cfg.mode = parse_train_mode(mode_name);
    cfg.validate();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    const std::uint64_t s = cfg.seeds.front();
    const double p = cfg.p_t_dbm.front();
    const double le = cfg.le_db.front();
    const int n = cfg.relay_counts.front();

    if (gen->parsed()) {
      const EnvConfig ec = cfg.env_config(p, le, n);
      const json j = instance_json(cfg, generate_channels(ec.topology, ec.path_loss, s), ec, s);
      if (out_dir.empty()) {
        out << j.dump(2) << "\n";
      } else {
        fs::create_directories(out_dir);
        std::ofstream os(fs::path(out_dir) / "instance.json");
        os << j.dump(2) << "\n";
        if (!os) throw std::runtime_error("cannot write instance.json in " + out_dir);
      }
      return 0;
    }

    if (lb->parsed()) {
      ChannelRealization ch;
      LinkBudget budget{dbm_to_mw(p), cfg.eta};
      double gamma_max = cfg.gamma_max;
      if (!instance_path.empty()) {
        std::ifstream is(instance_path);
        if (!is) {
          err << "error: cannot open instance " << instance_path << "\n";
          return 2;
        }
        json j;
        try {
          j = json::parse(is);
          ch = channels_from_json(j.at("channels"));
          budget.p_t = dbm_to_mw(j.value("p_t_dbm", p));
          budget.eta = j.value("eta", cfg.eta);
          gamma_max = j.value("gamma_max", cfg.gamma_max);
        } catch (const std::exception& e) {
          err << "error: bad instance: " << e.what() << "\n";
          return 2;
        }
      } else {
        const EnvConfig ec = cfg.env_config(p, le, n);
        ch = generate_channels(ec.topology, ec.path_loss, s);
      }
      RelayConfig rc;
      rc.gamma_max = gamma_max;
      rc.modes = modes_bits.empty() ? ModeVector(static_cast<std::size_t>(ch.relay_count()), false)
                                    : bits_to_modes(modes_bits);
      if (static_cast<int>(rc.modes.size()) != ch.relay_count()) {
        err << "error: --modes needs one bit per relay\n";
        return 2;
      }
      rc.phases = passive_phases(ch, rc.modes, gamma_max);
      const EnhancedChannels enh = enhance_channels(ch, rc);
      const LowerBoundResult r = solve_lower_bound(enh, budget, cfg.agent.lower_bound);
      json j;
      j["value"] = r.value;
      j["achieved"] = r.achieved;
      j["t_opt"] = r.t_opt;
      j["r_upper"] = r.r_upper;
      j["r_lower"] = r.r_lower;
      j["gap"] = r.gap;
      j["iterations"] = r.iterations;
      j["solves"] = r.solves;
      j["converged"] = r.converged;
      j["modes"] = modes_to_bits(rc.modes);
      j["phases"] = rc.phases;
      j["w0"] = to_json(r.w0_opt);
      j["w1"] = to_json(r.w1_exec);
      j["relay_powers_mw"] = r.relay_powers;
      out << j.dump(2) << "\n";
      return 0;
    }

    if (tr->parsed()) {
      const RunDir dir = make_run_dir(cfg, out_dir, config_text);
      const Environment env(cfg.env_config(p, le, n));
      Agents ag;
      const auto records = train(env, cfg.agent, cfg.mode, cfg.episodes, s, {}, &ag);
      emit_csv(episode_rows(records, to_string(cfg.mode), p, le, n, s, cfg.record_runtime),
               (dir.root / "results.csv").string());
      save_mlp((dir.checkpoints / "q.bin").string(), ag.q);
      save_mlp((dir.checkpoints / "q_target.bin").string(), ag.q_target);
      save_mlp((dir.checkpoints / "actor.bin").string(), ag.actor);
      save_mlp((dir.checkpoints / "actor_target.bin").string(), ag.actor_target);
      save_mlp((dir.checkpoints / "critic.bin").string(), ag.critic);
      save_mlp((dir.checkpoints / "critic_target.bin").string(), ag.critic_target);
      save_adam(dir.checkpoints / "q_adam.bin", ag.q_opt);
      save_adam(dir.checkpoints / "actor_adam.bin", ag.actor_opt);
      save_adam(dir.checkpoints / "critic_adam.bin", ag.critic_opt);
      out << (dir.root / "results.csv").string() << "\n";
      return 0;
    }

    if (bl->parsed() || sw->parsed()) {
      if (bl->parsed()) {
        cfg.schemes = scheme_name.empty() ? std::vector<std::string>{"random", "max_dl", "max_energy", "dl_only"}
                                          : std::vector<std::string>{scheme_name};
      }
      const RunDir dir = make_run_dir(cfg, out_dir, config_text);
      int failures = 0;
      const auto rows = run_sweep(cfg, [&](const ResultRow& r) {
        if (!r.error.empty()) {
          ++failures;
          err << "cell " << r.scheme << " p_t=" << r.p_t_dbm << " L_e=" << r.le_db << " N=" << r.n
              << " seed=" << r.seed << " failed: " << r.error << "\n";
        }
      });
      emit_csv(rows, (dir.root / "results.csv").string());
      out << (dir.root / "results.csv").string() << "\n";
      return failures == 0 ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace hrelay
