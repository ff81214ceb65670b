// SPDX-License-Identifier: Apache-2.0
//
// Per-cell downlink schedulers: round-robin and proportional fair.  Both
// operate on a small mutable state object so the simulator can advance every
// cell independently and deterministically.

#pragma once

#include <span>
#include <vector>

namespace ipred {

struct CellSchedulerState {
  int cell_idx = 0;
  std::vector<int> ue_list;  // global UE ids in fixed service order
  std::size_t rr_cursor = 0;

  // Proportional-fair bookkeeping: exponential moving average of served
  // rate per UE, horizon tau in TTIs, and a floor keeping ratios finite.
  std::vector<double> avg_throughput;
  double pf_horizon = 100.0;
  double min_throughput = 1e-6;

  static CellSchedulerState make(int cell_idx, std::vector<int> ue_list,
                                 double pf_horizon, double min_throughput);
};

// Serves the next UE in list order, wrapping around; advances the cursor.
// Throws std::invalid_argument for an empty cell.
int rr_next(CellSchedulerState& state);

// Serves argmax of inst_rate[i] / avg_throughput[i]; ties resolve to the
// lowest position in ue_list.  `inst_rate` is aligned with ue_list.  Does
// not mutate state (call pfs_update afterwards with the realised rate).
int pfs_next(const CellSchedulerState& state, std::span<const double> inst_rate);

// EMA update after one TTI: the served UE accrues `achieved_rate`, all
// others accrue zero.  Averages never fall below min_throughput.
void pfs_update(CellSchedulerState& state, int served_ue, double achieved_rate);

}  // namespace ipred
