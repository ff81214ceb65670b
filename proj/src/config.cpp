// SPDX-License-Identifier: Apache-2.0

#include "ipred/config.hpp"

#include <fstream>
#include <set>

#include "ipred/predictors.hpp"

namespace ipred {

void SweepSpec::validate() const {
  if (schedulers.empty()) throw ConfigError("sweep.schedulers is empty");
  if (training_lens.empty()) throw ConfigError("sweep.training_lens is empty");
  for (auto l : training_lens)
    if (l < 2) throw ConfigError("sweep.training_lens entries must be >= 2");
  for (double g : gamma0s)
    if (!(g > 0.0) || !(g < 1.0))
      throw ConfigError("sweep.gamma0s entries must lie in (0, 1)");
  for (double a : lpp_alphas)
    if (!(a > 0.0) || !(a <= 1.0))
      throw ConfigError("sweep.lpp_alphas entries must lie in (0, 1]");
  if (predictors.empty()) throw ConfigError("sweep.predictors is empty");
  for (const auto& p : predictors) predictor_from_string(p);  // throws
  if (drops < 1) throw ConfigError("sweep.drops must be >= 1");
}

void HarnessConfig::validate() const {
  sim.validate();
  sweep.validate();
  if (threads < 0) throw ConfigError("threads must be >= 0");
  for (auto l : sweep.training_lens)
    if (l >= sim.total_ttis)
      throw ConfigError(
          "sweep.training_lens entries must be smaller than sim.total_ttis");
  bool wants_gamma = false;
  for (const auto& p : sweep.predictors)
    wants_gamma |= (p == "mq_cond" || p == "mq_marg");
  if (wants_gamma && sweep.gamma0s.empty())
    throw ConfigError("sweep.gamma0s must be non-empty for MQ predictors");
  bool wants_alpha = false;
  for (const auto& p : sweep.predictors) wants_alpha |= (p == "lpp");
  if (wants_alpha && sweep.lpp_alphas.empty())
    throw ConfigError("sweep.lpp_alphas must be non-empty for lpp");
}

namespace {

// Pulls `key` out of `obj` into `out` (when present) with a readable error
// if the JSON type does not match.
template <typename T>
void read_key(const nlohmann::json& obj, const std::string& scope,
              const std::string& key, T& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    it->get_to(out);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config key '" + scope + key +
                      "' has the wrong type: " + e.what());
  }
}

void reject_unknown(const nlohmann::json& obj, const std::string& scope,
                    const std::set<std::string>& known) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!known.count(key))
      throw ConfigError("unknown config key '" + scope + key + "'");
  }
}

SimConfig sim_from_json(const nlohmann::json& j) {
  SimConfig sim;
  if (j.is_null()) return sim;
  if (!j.is_object()) throw ConfigError("'sim' must be an object");
  reject_unknown(j, "sim.",
                 {"n_cells", "inter_site_distance", "k_min", "k_max",
                  "min_bs_ue_distance", "n_antennas", "spacing_ratio",
                  "rice_factor_db", "pathloss_exponent", "tx_power_dbm",
                  "noise_power_dbm", "edge_snr_db", "scheduler", "pf_horizon",
                  "pf_min_throughput", "total_ttis", "seed", "freeze_fading",
                  "monitored_ues"});
  read_key(j, "sim.", "n_cells", sim.n_cells);
  read_key(j, "sim.", "inter_site_distance", sim.inter_site_distance);
  read_key(j, "sim.", "k_min", sim.k_min);
  read_key(j, "sim.", "k_max", sim.k_max);
  read_key(j, "sim.", "min_bs_ue_distance", sim.min_bs_ue_distance);
  read_key(j, "sim.", "n_antennas", sim.n_antennas);
  read_key(j, "sim.", "spacing_ratio", sim.spacing_ratio);
  read_key(j, "sim.", "rice_factor_db", sim.rice_factor_db);
  read_key(j, "sim.", "pathloss_exponent", sim.pathloss_exponent);
  read_key(j, "sim.", "tx_power_dbm", sim.tx_power_dbm);
  read_key(j, "sim.", "noise_power_dbm", sim.noise_power_dbm);
  read_key(j, "sim.", "edge_snr_db", sim.edge_snr_db);
  if (j.contains("scheduler")) {
    std::string s;
    read_key(j, "sim.", "scheduler", s);
    sim.scheduler = scheduler_from_string(s);
  }
  read_key(j, "sim.", "pf_horizon", sim.pf_horizon);
  read_key(j, "sim.", "pf_min_throughput", sim.pf_min_throughput);
  read_key(j, "sim.", "total_ttis", sim.total_ttis);
  read_key(j, "sim.", "seed", sim.seed);
  read_key(j, "sim.", "freeze_fading", sim.freeze_fading);
  read_key(j, "sim.", "monitored_ues", sim.monitored_ues);
  return sim;
}

SweepSpec sweep_from_json(const nlohmann::json& j) {
  SweepSpec sweep;
  if (j.is_null()) return sweep;
  if (!j.is_object()) throw ConfigError("'sweep' must be an object");
  reject_unknown(j, "sweep.",
                 {"schedulers", "training_lens", "gamma0s", "lpp_alphas",
                  "predictors", "drops"});
  if (j.contains("schedulers")) {
    std::vector<std::string> names;
    read_key(j, "sweep.", "schedulers", names);
    sweep.schedulers.clear();
    for (const auto& n : names)
      sweep.schedulers.push_back(scheduler_from_string(n));
  }
  read_key(j, "sweep.", "training_lens", sweep.training_lens);
  read_key(j, "sweep.", "gamma0s", sweep.gamma0s);
  read_key(j, "sweep.", "lpp_alphas", sweep.lpp_alphas);
  read_key(j, "sweep.", "predictors", sweep.predictors);
  read_key(j, "sweep.", "drops", sweep.drops);
  return sweep;
}

}  // namespace

HarnessConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  reject_unknown(j, "", {"sim", "sweep", "cache_dir", "out_dir", "threads"});
  HarnessConfig cfg;
  cfg.sim = sim_from_json(j.contains("sim") ? j.at("sim") : nlohmann::json());
  cfg.sweep =
      sweep_from_json(j.contains("sweep") ? j.at("sweep") : nlohmann::json());
  read_key(j, "", "cache_dir", cfg.cache_dir);
  read_key(j, "", "out_dir", cfg.out_dir);
  read_key(j, "", "threads", cfg.threads);
  cfg.validate();
  return cfg;
}

HarnessConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " +
                      e.what());
  }
  try {
    return config_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

nlohmann::json config_to_json(const HarnessConfig& cfg) {
  nlohmann::json sim{
      {"n_cells", cfg.sim.n_cells},
      {"inter_site_distance", cfg.sim.inter_site_distance},
      {"k_min", cfg.sim.k_min},
      {"k_max", cfg.sim.k_max},
      {"min_bs_ue_distance", cfg.sim.min_bs_ue_distance},
      {"n_antennas", cfg.sim.n_antennas},
      {"spacing_ratio", cfg.sim.spacing_ratio},
      {"rice_factor_db", cfg.sim.rice_factor_db},
      {"pathloss_exponent", cfg.sim.pathloss_exponent},
      {"tx_power_dbm", cfg.sim.tx_power_dbm},
      {"noise_power_dbm", cfg.sim.noise_power_dbm},
      {"edge_snr_db", cfg.sim.edge_snr_db},
      {"scheduler", to_string(cfg.sim.scheduler)},
      {"pf_horizon", cfg.sim.pf_horizon},
      {"pf_min_throughput", cfg.sim.pf_min_throughput},
      {"total_ttis", cfg.sim.total_ttis},
      {"seed", cfg.sim.seed},
      {"freeze_fading", cfg.sim.freeze_fading},
      {"monitored_ues", cfg.sim.monitored_ues},
  };
  std::vector<std::string> scheds;
  for (auto s : cfg.sweep.schedulers) scheds.push_back(to_string(s));
  nlohmann::json sweep{
      {"schedulers", scheds},
      {"training_lens", cfg.sweep.training_lens},
      {"gamma0s", cfg.sweep.gamma0s},
      {"lpp_alphas", cfg.sweep.lpp_alphas},
      {"predictors", cfg.sweep.predictors},
      {"drops", cfg.sweep.drops},
  };
  return nlohmann::json{{"sim", sim},
                        {"sweep", sweep},
                        {"cache_dir", cfg.cache_dir},
                        {"out_dir", cfg.out_dir},
                        {"threads", cfg.threads}};
}

}  // namespace ipred
