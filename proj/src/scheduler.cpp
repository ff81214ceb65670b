// SPDX-License-Identifier: Apache-2.0

#include "ipred/scheduler.hpp"

#include <algorithm>
#include <stdexcept>

namespace ipred {

CellSchedulerState CellSchedulerState::make(int cell_idx,
                                            std::vector<int> ue_list,
                                            double pf_horizon,
                                            double min_throughput) {
  if (ue_list.empty())
    throw std::invalid_argument("scheduler: cell has no UEs");
  if (!(pf_horizon >= 1.0))
    throw std::invalid_argument("scheduler: pf_horizon must be >= 1");
  if (!(min_throughput > 0.0))
    throw std::invalid_argument("scheduler: min_throughput must be positive");
  CellSchedulerState s;
  s.cell_idx = cell_idx;
  s.ue_list = std::move(ue_list);
  s.rr_cursor = 0;
  // Identical initial averages so the first PF decisions are rate-driven.
  s.avg_throughput.assign(s.ue_list.size(), min_throughput);
  s.pf_horizon = pf_horizon;
  s.min_throughput = min_throughput;
  return s;
}

int rr_next(CellSchedulerState& state) {
  if (state.ue_list.empty())
    throw std::invalid_argument("rr_next: cell has no UEs");
  const int ue = state.ue_list[state.rr_cursor];
  state.rr_cursor = (state.rr_cursor + 1) % state.ue_list.size();
  return ue;
}

int pfs_next(const CellSchedulerState& state,
             std::span<const double> inst_rate) {
  if (state.ue_list.empty())
    throw std::invalid_argument("pfs_next: cell has no UEs");
  if (inst_rate.size() != state.ue_list.size())
    throw std::invalid_argument("pfs_next: rate vector size mismatch");
  std::size_t best = 0;
  double best_metric = inst_rate[0] / state.avg_throughput[0];
  for (std::size_t i = 1; i < inst_rate.size(); ++i) {
    const double metric = inst_rate[i] / state.avg_throughput[i];
    if (metric > best_metric) {
      best_metric = metric;
      best = i;
    }
  }
  return state.ue_list[best];
}

void pfs_update(CellSchedulerState& state, int served_ue,
                double achieved_rate) {
  const auto it =
      std::find(state.ue_list.begin(), state.ue_list.end(), served_ue);
  if (it == state.ue_list.end())
    throw std::invalid_argument("pfs_update: UE not in this cell");
  const std::size_t served = static_cast<std::size_t>(it - state.ue_list.begin());
  const double keep = 1.0 - 1.0 / state.pf_horizon;
  const double add = 1.0 / state.pf_horizon;
  for (std::size_t i = 0; i < state.avg_throughput.size(); ++i) {
    const double rate = (i == served) ? achieved_rate : 0.0;
    state.avg_throughput[i] =
        std::max(keep * state.avg_throughput[i] + add * rate,
                 state.min_throughput);
  }
}

}  // namespace ipred
