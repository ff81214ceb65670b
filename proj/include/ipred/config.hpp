// SPDX-License-Identifier: Apache-2.0
//
// JSON experiment configuration.  Every key is optional and falls back to
// the defaults below; unknown keys are rejected so typos cannot silently
// change an experiment.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "ipred/simulator.hpp"

namespace ipred {

// Which (scheduler, training length, target rate, predictor, drop) grid a
// sweep evaluates.
struct SweepSpec {
  std::vector<SchedulerKind> schedulers = {SchedulerKind::kRoundRobin};
  std::vector<std::int64_t> training_lens = {50, 500, 5000};
  std::vector<double> gamma0s = {0.1, 0.01, 0.001};
  std::vector<double> lpp_alphas = {0.05, 0.1, 0.2, 0.5, 0.9};
  std::vector<std::string> predictors = {"mq_cond", "mq_marg", "mp_cond",
                                         "mp_marg", "lpp"};
  int drops = 4;

  void validate() const;
};

struct HarnessConfig {
  SimConfig sim;
  SweepSpec sweep;
  std::string cache_dir = "cache";
  std::string out_dir = "out";
  int threads = 0;  // 0: use hardware concurrency

  void validate() const;
};

// Raised for malformed configuration files; the message carries the file
// path and the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

HarnessConfig config_from_json(const nlohmann::json& j);
HarnessConfig load_config(const std::string& path);

// Round-trip serialisation, used to echo the effective configuration into
// run manifests.  Key order is alphabetical, so output is reproducible.
nlohmann::json config_to_json(const HarnessConfig& cfg);

}  // namespace ipred
