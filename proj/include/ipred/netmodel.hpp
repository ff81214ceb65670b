// SPDX-License-Identifier: Apache-2.0
//
// Physical-layer model of the multi-cell downlink: geometry, Rician fading
// channels for uniform linear arrays, maximum-ratio transmit beamforming,
// and the resulting SINR / aggregate-interference at a receiver.

#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "ipred/rng.hpp"

namespace ipred {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Static radio-layer parameters shared by every link in a scenario.
struct RadioParams {
  int n_antennas = 16;             // ULA elements per base station
  double spacing_ratio = 0.5;      // element spacing / carrier wavelength
  double rice_factor = 10.0;       // LOS-to-NLOS power ratio (linear)
  double pathloss_exponent = 3.5;  // distance attenuation exponent
  double ref_gain = 1.0;           // pathloss numerator: gain = ref_gain / d^nu
  double tx_power_w = 39.810717055349734;  // 46 dBm
  double noise_power_w = 7.943282347242822e-14;  // -101 dBm
  std::vector<double> ue_phase_shifts;  // static LOS phase offset per UE [rad]

  // Throws std::invalid_argument when any field is out of range.
  void validate() const;
};

// Cell layout and user placement for one drop.  UE indices are global and
// contiguous; `cells[n]` lists them in fixed service order.
struct NetworkScenario {
  std::vector<Vec2> bs_positions;
  std::vector<Vec2> ue_positions;
  std::vector<int> cell_of_ue;            // serving cell per UE
  std::vector<std::vector<int>> cells;    // UE ids per cell, service order
  double inter_site_distance = 200.0;
  int central_cell = 0;                   // cell whose UEs are monitored

  int n_cells() const { return static_cast<int>(bs_positions.size()); }
  int n_ues() const { return static_cast<int>(ue_positions.size()); }

  // Structural consistency: index ranges, per-cell population bounds, and
  // minimum BS-UE separation.  Throws std::invalid_argument on violation.
  void validate(int k_min, int k_max, double min_bs_ue_distance) const;
};

struct ChannelVector {
  std::vector<std::complex<double>> coeff;  // one entry per antenna
};

struct Beamformer {
  std::vector<std::complex<double>> weights;  // unit norm
};

// Precomputed static part of one BS->UE link: the deterministic LOS
// component (already scaled by pathloss and the Rician power split) plus
// the per-component standard deviation of the diffuse NLOS part.  Drawing a
// channel realisation from this is just 2*n_antennas Gaussians.
struct LinkFading {
  std::vector<std::complex<double>> los;  // sqrt(psi/(psi+1) * g) * a(theta) * e^{j delta}
  double nlos_sigma = 0.0;                // sqrt(g / (psi+1) / 2), g = ref_gain/d^nu
};

double distance(const Vec2& a, const Vec2& b);

// Angle of the BS->UE ray in radians (atan2 convention, range (-pi, pi]).
// Throws std::domain_error when the two positions coincide.
double angle_of_departure(const Vec2& bs, const Vec2& ue);

// ULA steering vector: entry m (0-based) is
//   exp(j * (phase_shift + 2*pi*spacing_ratio*m*cos(theta))).
// All entries have unit magnitude.
ChannelVector steering_vector(double theta, const RadioParams& params,
                              double phase_shift);

LinkFading make_link_fading(const Vec2& bs, const Vec2& ue,
                            const RadioParams& params, double phase_shift);

// One Rician realisation: los + CN(0, 2*sigma^2) per entry.  Consumes
// exactly 2*n_antennas normal deviates from `rng`, in antenna order.
void sample_channel(const LinkFading& fading, Rng& rng, ChannelVector& out);

// Convenience wrapper building the LinkFading on the fly.
ChannelVector draw_channel(int bs_idx, int ue_idx,
                           const NetworkScenario& scenario,
                           const RadioParams& params, Rng& rng);

// Maximum-ratio transmit beamformer g = conj(h) / ||h||.  The dot product
// channel_gain(h, g) is then ||h||, the best achievable with unit power.
// Throws std::invalid_argument for an all-zero channel.
Beamformer mrt_beamformer(const ChannelVector& h);

// Unconjugated dot product sum_m h_m * g_m (the beamformer already carries
// the conjugation needed for matched filtering).
std::complex<double> channel_gain(const ChannelVector& h, const Beamformer& g);

struct SinrIpv {
  double sinr = 0.0;   // linear
  double ipv_w = 0.0;  // aggregate inter-cell interference power [W]
};

// One interfering link as seen by a receiver: the cross channel from the
// interfering BS and the beamformer that BS applied for its own user.
struct InterferingLink {
  const ChannelVector* cross_channel = nullptr;
  const Beamformer* beam = nullptr;
};

// SINR and interference power for a receiver served with `g_serving` over
// `h_serving`, with equal per-BS transmit power.  Throws on antenna-count
// mismatch between any channel/beamformer pair.
SinrIpv sinr_and_ipv(const ChannelVector& h_serving, const Beamformer& g_serving,
                     std::span<const InterferingLink> interferers,
                     const RadioParams& params);

}  // namespace ipred
