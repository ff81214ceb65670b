// SPDX-License-Identifier: Apache-2.0
//
// Experiment harness: ties the simulator, density models and predictors
// into reproducible sweeps.  Recorded series are cached on disk keyed by
// (config hash, seed); sweep results are written as CSV plus a JSON mirror
// that embeds the run manifest.  Output bytes depend only on the binary
// and the configuration -- reruns produce identical files.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ipred/config.hpp"
#include "ipred/predictors.hpp"
#include "ipred/simulator.hpp"

namespace ipred {

struct EvalMetrics {
  double theta = 0.0;    // fraction of transitions where prediction < actual
  double mean_se = 0.0;  // mean achieved spectral efficiency [bit/s/Hz]
  std::int64_t n_eval = 0;
};

// Replays a series through a predictor: each value is predicted from its
// predecessor (`context_w` seeds the first prediction).  A transition
// fails (chi = 1) when the predicted power is strictly below the realised
// one; otherwise the achieved rate log2(1 + signal/(predicted + noise))
// counts towards mean_se.  Resets the predictor first.
EvalMetrics evaluate(Predictor& pred, double context_w,
                     std::span<const double> ipv_w,
                     std::span<const double> signal_w, double noise_w);

// Convenience form for a standalone series: the first value is the context,
// the remaining n-1 are targets.
EvalMetrics evaluate_series(Predictor& pred, std::span<const double> ipv_w,
                            std::span<const double> signal_w, double noise_w);

// One result row of a sweep.  gamma0 is empty for predictors without a
// target rate (mp_*, lpp); lpp_alpha records the winning smoothing factor
// for lpp rows.
struct EvalRow {
  std::string predictor;
  SchedulerKind scheduler = SchedulerKind::kRoundRobin;
  std::int64_t training_len = 0;
  std::optional<double> gamma0;
  int drop = 0;
  int ue = 0;  // global UE index
  double theta = 0.0;
  double mean_se = 0.0;
  std::int64_t n_eval = 0;
  std::optional<double> lpp_alpha;
};

struct ExperimentResult {
  std::vector<EvalRow> rows;            // one per grid point (lpp: best alpha)
  std::vector<EvalRow> lpp_alpha_rows;  // every (alpha, ...) combination
  nlohmann::json manifest;
};

// Runs the full sweep grid: schedulers x drops simulations (parallel over
// tasks when threads allows, with results identical to sequential), then
// per (training length, UE) model fits and predictor evaluations.  Uses
// and fills the series cache under cfg.cache_dir.
ExperimentResult run_experiment(const HarnessConfig& cfg);

// Simulates or loads-from-cache the series for one configuration.  Cache
// entries failing validation are re-simulated with a warning.
std::vector<IpvSeries> cached_series(const SimConfig& cfg,
                                     const std::string& cache_dir);

// Writes reports.csv, lpp_alpha_sweep.csv, reports.json and
// run_manifest.json under out_dir (created if needed).
void write_reports(const ExperimentResult& result, const std::string& out_dir);

// Empirical CDF points of a set of per-UE theta values: sorted
// (theta, fraction <= theta) pairs.
std::vector<std::pair<double, double>> cdf_of_theta(
    std::vector<double> thetas);

// Re-aggregates a finished sweep (reports.json in `reports_dir`) into one
// plot-ready CSV:
//   2: theta / SE versus training length          (round-robin)
//   3: per-UE theta empirical CDF                 (round-robin)
//   4: theta / SE versus target rate gamma0       (round-robin)
//   5: theta / SE versus target rate gamma0       (proportional fair)
// `gamma0` selects the MQ rows for figures 2-3; `training_len` fixes L for
// figures 3-5.  Returns the written file path.
std::string export_fig(int fig, const std::string& reports_dir,
                       const std::string& out_dir, double gamma0,
                       std::int64_t training_len);

// Loads the rows of a written reports.json (inverse of write_reports).
std::vector<EvalRow> load_report_rows(const std::string& reports_json_path);

}  // namespace ipred
