// SPDX-License-Identifier: Apache-2.0

#include "ipred/netmodel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ipred {

void RadioParams::validate() const {
  if (n_antennas < 1) throw std::invalid_argument("n_antennas must be >= 1");
  if (!(spacing_ratio > 0.0))
    throw std::invalid_argument("spacing_ratio must be positive");
  if (!(rice_factor >= 0.0))
    throw std::invalid_argument("rice_factor must be non-negative");
  if (!(pathloss_exponent > 0.0))
    throw std::invalid_argument("pathloss_exponent must be positive");
  if (!(ref_gain > 0.0)) throw std::invalid_argument("ref_gain must be positive");
  if (!(tx_power_w > 0.0))
    throw std::invalid_argument("tx_power_w must be positive");
  if (!(noise_power_w > 0.0))
    throw std::invalid_argument("noise_power_w must be positive");
}

void NetworkScenario::validate(int k_min, int k_max,
                               double min_bs_ue_distance) const {
  if (bs_positions.empty()) throw std::invalid_argument("no base stations");
  if (cells.size() != bs_positions.size())
    throw std::invalid_argument("cells/bs_positions size mismatch");
  if (cell_of_ue.size() != ue_positions.size())
    throw std::invalid_argument("cell_of_ue/ue_positions size mismatch");
  if (central_cell < 0 || central_cell >= n_cells())
    throw std::invalid_argument("central_cell out of range");

  std::vector<char> seen(ue_positions.size(), 0);
  for (int n = 0; n < n_cells(); ++n) {
    const auto& members = cells[static_cast<std::size_t>(n)];
    const int k = static_cast<int>(members.size());
    if (k < k_min || k > k_max)
      throw std::invalid_argument("cell " + std::to_string(n) + " has " +
                                  std::to_string(k) +
                                  " UEs, outside [k_min, k_max]");
    for (int ue : members) {
      if (ue < 0 || ue >= n_ues())
        throw std::invalid_argument("UE index out of range");
      if (seen[static_cast<std::size_t>(ue)])
        throw std::invalid_argument("UE assigned to more than one cell");
      seen[static_cast<std::size_t>(ue)] = 1;
      if (cell_of_ue[static_cast<std::size_t>(ue)] != n)
        throw std::invalid_argument("cell_of_ue inconsistent with cells");
      const double d = distance(bs_positions[static_cast<std::size_t>(n)],
                                ue_positions[static_cast<std::size_t>(ue)]);
      if (d < min_bs_ue_distance)
        throw std::invalid_argument("UE closer than minimum BS-UE distance");
    }
  }
  for (char s : seen)
    if (!s) throw std::invalid_argument("UE not assigned to any cell");
}

double distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double angle_of_departure(const Vec2& bs, const Vec2& ue) {
  const double dx = ue.x - bs.x;
  const double dy = ue.y - bs.y;
  if (dx == 0.0 && dy == 0.0)
    throw std::domain_error("angle_of_departure: UE coincides with BS");
  return std::atan2(dy, dx);
}

ChannelVector steering_vector(double theta, const RadioParams& params,
                              double phase_shift) {
  ChannelVector a;
  a.coeff.resize(static_cast<std::size_t>(params.n_antennas));
  const double step = 2.0 * std::numbers::pi * params.spacing_ratio *
                      std::cos(theta);
  for (int m = 0; m < params.n_antennas; ++m) {
    const double phase = phase_shift + step * static_cast<double>(m);
    a.coeff[static_cast<std::size_t>(m)] = {std::cos(phase), std::sin(phase)};
  }
  return a;
}

LinkFading make_link_fading(const Vec2& bs, const Vec2& ue,
                            const RadioParams& params, double phase_shift) {
  const double d = distance(bs, ue);
  if (d <= 0.0)
    throw std::domain_error("make_link_fading: UE coincides with BS");
  const double gain = params.ref_gain / std::pow(d, params.pathloss_exponent);
  const double psi = params.rice_factor;
  const double los_scale = std::sqrt(gain * psi / (psi + 1.0));

  LinkFading f;
  ChannelVector a =
      steering_vector(angle_of_departure(bs, ue), params, phase_shift);
  f.los.resize(a.coeff.size());
  for (std::size_t m = 0; m < a.coeff.size(); ++m)
    f.los[m] = los_scale * a.coeff[m];
  f.nlos_sigma = std::sqrt(gain / (psi + 1.0) / 2.0);
  return f;
}

void sample_channel(const LinkFading& fading, Rng& rng, ChannelVector& out) {
  out.coeff.resize(fading.los.size());
  const double s = fading.nlos_sigma;
  for (std::size_t m = 0; m < fading.los.size(); ++m) {
    const double re = rng.normal();
    const double im = rng.normal();
    out.coeff[m] = fading.los[m] + std::complex<double>(s * re, s * im);
  }
}

ChannelVector draw_channel(int bs_idx, int ue_idx,
                           const NetworkScenario& scenario,
                           const RadioParams& params, Rng& rng) {
  const LinkFading f = make_link_fading(
      scenario.bs_positions[static_cast<std::size_t>(bs_idx)],
      scenario.ue_positions[static_cast<std::size_t>(ue_idx)], params,
      params.ue_phase_shifts.empty()
          ? 0.0
          : params.ue_phase_shifts[static_cast<std::size_t>(ue_idx)]);
  ChannelVector h;
  sample_channel(f, rng, h);
  return h;
}

Beamformer mrt_beamformer(const ChannelVector& h) {
  double norm_sq = 0.0;
  for (const auto& c : h.coeff) norm_sq += std::norm(c);
  if (norm_sq <= 0.0)
    throw std::invalid_argument("mrt_beamformer: zero-norm channel");
  const double inv_norm = 1.0 / std::sqrt(norm_sq);
  Beamformer g;
  g.weights.resize(h.coeff.size());
  for (std::size_t m = 0; m < h.coeff.size(); ++m)
    g.weights[m] = std::conj(h.coeff[m]) * inv_norm;
  return g;
}

std::complex<double> channel_gain(const ChannelVector& h, const Beamformer& g) {
  if (h.coeff.size() != g.weights.size())
    throw std::invalid_argument("channel_gain: antenna count mismatch");
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t m = 0; m < h.coeff.size(); ++m)
    acc += h.coeff[m] * g.weights[m];
  return acc;
}

SinrIpv sinr_and_ipv(const ChannelVector& h_serving, const Beamformer& g_serving,
                     std::span<const InterferingLink> interferers,
                     const RadioParams& params) {
  const double p = params.tx_power_w;
  const double signal = std::norm(channel_gain(h_serving, g_serving)) * p;
  double ipv = 0.0;
  for (const auto& link : interferers) {
    if (link.cross_channel == nullptr || link.beam == nullptr)
      throw std::invalid_argument("sinr_and_ipv: null interfering link");
    ipv += std::norm(channel_gain(*link.cross_channel, *link.beam)) * p;
  }
  SinrIpv out;
  out.ipv_w = ipv;
  out.sinr = signal / (ipv + params.noise_power_w);
  return out;
}

}  // namespace ipred
