#include "hrelay/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace hrelay {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_scalar(const std::string& key, const std::string& raw) {
  std::istringstream is(trim(raw));
  T v{};
  is >> v;
  if (is.fail() || !is.eof()) throw ConfigError("config: cannot parse '" + raw + "' for " + key);
  return v;
}

template <>
bool parse_scalar<bool>(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: expected a boolean for " + key);
}

template <>
std::string parse_scalar<std::string>(const std::string&, const std::string& raw) {
  return trim(raw);
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& raw) {
  std::vector<T> out;
  for (const auto& item : split(raw, ',')) out.push_back(parse_scalar<T>(key, item));
  if (out.empty()) throw ConfigError("config: empty list for " + key);
  return out;
}

Point parse_point(const std::string& key, const std::string& raw) {
  const auto xy = parse_list<double>(key, raw);
  if (xy.size() != 2) throw ConfigError("config: expected 'x, y' for " + key);
  return {xy[0], xy[1]};
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  template <typename T>
  void get(const std::string& section, const std::string& key, T& dst) {
    known_[section].insert(key);
    if (auto v = raw(section, key)) dst = parse_scalar<T>(section + "." + key, *v);
  }

  template <typename T>
  void get_list(const std::string& section, const std::string& key, std::vector<T>& dst) {
    known_[section].insert(key);
    if (auto v = raw(section, key)) dst = parse_list<T>(section + "." + key, *v);
  }

  std::optional<std::string> raw(const std::string& section, const std::string& key) {
    known_[section].insert(key);
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto v = sec->get_child_optional(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return v->data();
  }

  void reject_unknown() const {
    for (const auto& [section, body] : tree_) {
      const auto it = known_.find(section);
      if (it == known_.end()) throw ConfigError("config: unknown section [" + section + "]");
      for (const auto& kv : body)
        if (!it->second.count(kv.first))
          throw ConfigError("config: unknown key '" + kv.first + "' in [" + section + "]");
    }
  }

 private:
  const pt::ptree& tree_;
  std::map<std::string, std::set<std::string>> known_;
};

}  // namespace

void ExperimentConfig::validate() const {
  try {
    topology.validate();
    path_loss.validate();
    agent.validate();
    for (double le : le_db)
      if (!(le >= 0.0)) throw ConfigError("config: L_e must be >= 0 dB");
    for (double p : p_t_dbm)
      if (!std::isfinite(p)) throw ConfigError("config: p_t_dbm must be finite");
    if (p_t_dbm.empty() || le_db.empty() || relay_counts.empty() || seeds.empty() || schemes.empty())
      throw ConfigError("config: sweep lists must be nonempty");
    for (int n : relay_counts)
      if (n < 1 || n > topology.relay_count())
        throw ConfigError("config: relay count outside [1, " + std::to_string(topology.relay_count()) + "]");
    const std::set<std::uint64_t> distinct(seeds.begin(), seeds.end());
    if (distinct.size() != seeds.size()) throw ConfigError("config: seeds must be distinct");
    static const std::set<std::string> known{"random",    "max_dl",     "max_energy", "dl_only",
                                             "optimized", "model_free", "simplified", "full_opt"};
    for (const auto& s : schemes)
      if (!known.count(s)) throw ConfigError("config: unknown scheme '" + s + "'");
    if (episodes < 1) throw ConfigError("config: episodes must be >= 1");
    if (draws < 1) throw ConfigError("config: draws must be >= 1");
    if (agent_window < 1) throw ConfigError("config: agent_window must be >= 1");
    if (run_id.empty() || run_id.find('/') != std::string::npos) throw ConfigError("config: bad run_id");
    env_config(p_t_dbm.front(), le_db.front(), relay_counts.front()).validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  } catch (const StructuralError& e) {
    throw ConfigError(e.what());
  }
}

EnvConfig ExperimentConfig::env_config(double p, double le, int relays) const {
  EnvConfig c;
  c.topology = topology.with_relays(relays);
  c.path_loss = path_loss;
  c.path_loss.direct_extra_attenuation_db = le;
  c.budget.p_t = dbm_to_mw(p);
  c.budget.eta = eta;
  c.gamma_max = gamma_max;
  c.energy_unit_mw = energy_unit_mw;
  c.e_max = e_max;
  c.e_init = e_init;
  c.passive_cost = passive_cost;
  c.episode_length = episode_length;
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  Reader r(tree);

  r.get("scenario", "antennas", c.topology.antennas);
  if (auto v = r.raw("scenario", "hap")) c.topology.hap = parse_point("scenario.hap", *v);
  if (auto v = r.raw("scenario", "receiver")) c.topology.receiver = parse_point("scenario.receiver", *v);
  if (auto v = r.raw("scenario", "relays")) {
    c.topology.relays.clear();
    for (const auto& p : split(*v, ';')) c.topology.relays.push_back(parse_point("scenario.relays", p));
  }
  r.get_list("scenario", "relay_counts", c.relay_counts);
  r.get_list("scenario", "seeds", c.seeds);

  r.get("channel", "unit_loss_db", c.path_loss.unit_loss_db);
  r.get("channel", "exponent", c.path_loss.exponent);
  r.get("channel", "noise_dbm", c.path_loss.noise_dbm);
  r.get_list("channel", "le_db", c.le_db);

  r.get_list("link", "p_t_dbm", c.p_t_dbm);
  r.get("link", "eta", c.eta);
  r.get("link", "gamma_max", c.gamma_max);

  r.get("env", "energy_unit_mw", c.energy_unit_mw);
  r.get("env", "e_max", c.e_max);
  r.get("env", "e_init", c.e_init);
  r.get("env", "passive_cost", c.passive_cost);
  r.get("env", "episode_length", c.episode_length);

  AgentConfig& a = c.agent;
  r.get("training", "episodes", c.episodes);
  if (auto v = r.raw("training", "mode")) {
    try {
      c.mode = parse_train_mode(trim(*v));
    } catch (const DomainError& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  r.get("training", "gamma", a.gamma);
  r.get("training", "sigma_noise", a.sigma_noise);
  r.get("training", "sigma_decay", a.sigma_decay);
  r.get("training", "eps_start", a.eps_start);
  r.get("training", "eps_end", a.eps_end);
  r.get("training", "eps_decay_episodes", a.eps_decay_episodes);
  r.get("training", "batch_size", a.batch_size);
  r.get("training", "ddpg_capacity", a.ddpg_capacity);
  r.get("training", "dqn_capacity", a.dqn_capacity);
  r.get("training", "dqn_sync_every", a.dqn_sync_every);
  r.get("training", "tau", a.tau);
  r.get("training", "lr_actor", a.lr_actor);
  r.get("training", "lr_critic", a.lr_critic);
  r.get("training", "lr_dqn", a.lr_dqn);
  r.get("training", "hidden", a.hidden);
  r.get("training", "convergence_window", a.convergence_window);

  r.get("solver", "eps", a.lower_bound.eps);
  r.get("solver", "max_iter", a.lower_bound.max_iter);
  r.get("solver", "lambda_tol", a.lower_bound.lambda_tol);
  r.get("solver", "tol", a.lower_bound.solver.tol);
  r.get("solver", "max_newton", a.lower_bound.solver.max_newton);
  r.get("solver", "randomization_samples", a.lower_bound.solver.randomization_samples);

  r.get_list("sweep", "schemes", c.schemes);
  r.get("sweep", "draws", c.draws);
  r.get("sweep", "agent_window", c.agent_window);
  r.get("sweep", "record_runtime", c.record_runtime);

  r.get("output", "dir", c.out_dir);
  r.get("output", "run_id", c.run_id);

  r.reject_unknown();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

}  // namespace hrelay
