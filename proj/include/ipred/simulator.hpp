// SPDX-License-Identifier: Apache-2.0
//
// Multi-cell downlink simulator.  Each TTI every cell schedules one of its
// UEs and beamforms to it with MRT; for every monitored UE (the central
// cell's users) the aggregate interference power from all other cells, the
// own-cell beamformed signal power, and the served flag are recorded.
//
// All randomness is drawn from counter-keyed streams (see rng.hpp), so the
// recorded series depend only on (config, seed) — not on thread count,
// scheduler work in other cells, or which UEs are monitored.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ipred/netmodel.hpp"

namespace ipred {

enum class SchedulerKind { kRoundRobin, kProportionalFair };

std::string to_string(SchedulerKind kind);
SchedulerKind scheduler_from_string(const std::string& name);

// Full description of one simulation run.  Power-like quantities are given
// in the units engineers quote them in (dBm / dB) and converted internally.
struct SimConfig {
  int n_cells = 9;                  // must be a perfect square (grid layout)
  double inter_site_distance = 200.0;  // metres
  int k_min = 2;                    // UEs per cell, inclusive bounds
  int k_max = 8;
  double min_bs_ue_distance = 1.0;  // metres

  int n_antennas = 16;
  double spacing_ratio = 0.5;       // element spacing over wavelength
  double rice_factor_db = 10.0;
  double pathloss_exponent = 3.5;
  double tx_power_dbm = 46.0;
  double noise_power_dbm = -101.0;
  double edge_snr_db = 20.0;        // mean SNR at the cell edge (isd/2)

  SchedulerKind scheduler = SchedulerKind::kRoundRobin;
  double pf_horizon = 100.0;
  double pf_min_throughput = 1e-6;

  std::int64_t total_ttis = 300000;
  std::uint64_t seed = 1;

  // When set, NLOS fading is drawn once (at t=0) and reused every TTI, so
  // the only time variation left is the scheduling pattern.
  bool freeze_fading = false;

  // Global UE indices to record; empty means every central-cell UE.  All
  // entries must belong to the central cell.
  std::vector<int> monitored_ues;

  void validate() const;

  double tx_power_w() const;
  double noise_power_w() const;
  double rice_factor_linear() const;
  // Pathloss numerator chosen so a single-antenna link at the cell edge
  // (distance isd/2) has mean SNR edge_snr_db:
  //   ref_gain = snr_lin * noise_w * (isd/2)^nu / tx_power_w.
  double ref_gain() const;
};

// Stable fingerprint of every semantic field of a SimConfig except the
// seed (the seed is tracked separately so one configuration can be reused
// across drops).
std::uint64_t config_hash(const SimConfig& cfg);

// Scenario plus the radio parameters (including per-UE LOS phases) drawn
// for one run.
struct ScenarioDraw {
  NetworkScenario scenario;
  RadioParams radio;
};

// Synthesises the cell grid and UE placement from the config's scenario
// stream: a sqrt(n_cells) x sqrt(n_cells) square BS grid, per-cell UE
// counts uniform in [k_min, k_max], UEs uniform in each cell's square less
// a min-distance disc, and one static LOS phase per UE.
ScenarioDraw make_scenario(const SimConfig& cfg);

// Recorded per-TTI observations for one monitored UE.
struct IpvSeries {
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  int ue = 0;                    // global UE index
  std::vector<double> ipv_w;     // aggregate other-cell interference power
  std::vector<double> signal_w;  // own-cell beamformed signal power
  std::vector<std::uint8_t> served;

  std::int64_t n_ttis() const { return static_cast<std::int64_t>(ipv_w.size()); }
};

struct SimResult {
  ScenarioDraw draw;
  std::vector<IpvSeries> series;  // one per monitored UE, in index order
};

// Global indices of the UEs a run records: cfg.monitored_ues validated
// against the central cell, or every central-cell UE when empty.  Returned
// sorted ascending.
std::vector<int> resolve_monitored(const SimConfig& cfg,
                                   const NetworkScenario& scenario);

SimResult run_simulation(const SimConfig& cfg);

// Training/evaluation split of a recorded series: the first `training_len`
// TTIs train the density model, the rest are prediction targets.  The
// context value is the last training observation, from which the first
// target is predicted.  Requires 2 <= training_len < length.
struct SeriesView {
  std::span<const double> training_ipv_w;
  double context_ipv_w = 0.0;
  std::span<const double> eval_ipv_w;
  std::span<const double> eval_signal_w;
};

SeriesView split_series(const IpvSeries& series, std::int64_t training_len);

// Binary container for a recorded series (little-endian, integrity
// checksum at the end).  load_series throws std::runtime_error with the
// offending path and reason on any corruption or format mismatch.
void save_series(const IpvSeries& series, const std::string& path);
IpvSeries load_series(const std::string& path);

// Plain-text export: header tti,ipv_watts,signal_watts,served with one row
// per TTI (tti is 1-based); doubles keep full precision.
void export_series_csv(const IpvSeries& series, const std::string& path);

}  // namespace ipred
