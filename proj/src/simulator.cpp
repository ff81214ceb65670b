// SPDX-License-Identifier: Apache-2.0

#include "ipred/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "ipred/hash.hpp"
#include "ipred/scheduler.hpp"

namespace ipred {

std::string to_string(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::kRoundRobin: return "rr";
    case SchedulerKind::kProportionalFair: return "pfs";
  }
  throw std::invalid_argument("unknown scheduler kind");
}

SchedulerKind scheduler_from_string(const std::string& name) {
  if (name == "rr") return SchedulerKind::kRoundRobin;
  if (name == "pfs") return SchedulerKind::kProportionalFair;
  throw std::invalid_argument("unknown scheduler '" + name +
                              "' (expected rr or pfs)");
}

void SimConfig::validate() const {
  if (n_cells < 1) throw std::invalid_argument("n_cells must be >= 1");
  const int g = static_cast<int>(std::lround(std::sqrt(double(n_cells))));
  if (g * g != n_cells)
    throw std::invalid_argument("n_cells must be a perfect square");
  if (!(inter_site_distance > 0.0))
    throw std::invalid_argument("inter_site_distance must be positive");
  if (k_min < 1 || k_max < k_min)
    throw std::invalid_argument("need 1 <= k_min <= k_max");
  if (!(min_bs_ue_distance >= 0.0) ||
      min_bs_ue_distance >= inter_site_distance / 2.0)
    throw std::invalid_argument(
        "min_bs_ue_distance must lie in [0, inter_site_distance/2)");
  if (n_antennas < 1) throw std::invalid_argument("n_antennas must be >= 1");
  if (!(spacing_ratio > 0.0))
    throw std::invalid_argument("spacing_ratio must be positive");
  if (!(pathloss_exponent > 0.0))
    throw std::invalid_argument("pathloss_exponent must be positive");
  if (!(pf_horizon >= 1.0))
    throw std::invalid_argument("pf_horizon must be >= 1");
  if (!(pf_min_throughput > 0.0))
    throw std::invalid_argument("pf_min_throughput must be positive");
  if (total_ttis < 1) throw std::invalid_argument("total_ttis must be >= 1");
}

double SimConfig::tx_power_w() const {
  return std::pow(10.0, (tx_power_dbm - 30.0) / 10.0);
}

double SimConfig::noise_power_w() const {
  return std::pow(10.0, (noise_power_dbm - 30.0) / 10.0);
}

double SimConfig::rice_factor_linear() const {
  return std::pow(10.0, rice_factor_db / 10.0);
}

double SimConfig::ref_gain() const {
  const double snr = std::pow(10.0, edge_snr_db / 10.0);
  const double edge = inter_site_distance / 2.0;
  return snr * noise_power_w() * std::pow(edge, pathloss_exponent) /
         tx_power_w();
}

std::uint64_t config_hash(const SimConfig& cfg) {
  Fnv1a64 h;
  h.update_str("ipred.simconfig.v1");
  h.update_i64(cfg.n_cells);
  h.update_f64(cfg.inter_site_distance);
  h.update_i64(cfg.k_min);
  h.update_i64(cfg.k_max);
  h.update_f64(cfg.min_bs_ue_distance);
  h.update_i64(cfg.n_antennas);
  h.update_f64(cfg.spacing_ratio);
  h.update_f64(cfg.rice_factor_db);
  h.update_f64(cfg.pathloss_exponent);
  h.update_f64(cfg.tx_power_dbm);
  h.update_f64(cfg.noise_power_dbm);
  h.update_f64(cfg.edge_snr_db);
  h.update_u8(cfg.scheduler == SchedulerKind::kRoundRobin ? 0 : 1);
  h.update_f64(cfg.pf_horizon);
  h.update_f64(cfg.pf_min_throughput);
  h.update_i64(cfg.total_ttis);
  h.update_u8(cfg.freeze_fading ? 1 : 0);
  h.update_u64(cfg.monitored_ues.size());
  for (int ue : cfg.monitored_ues) h.update_i64(ue);
  return h.digest();
}

ScenarioDraw make_scenario(const SimConfig& cfg) {
  cfg.validate();
  ScenarioDraw d;
  auto& sc = d.scenario;
  sc.inter_site_distance = cfg.inter_site_distance;

  const int g = static_cast<int>(std::lround(std::sqrt(double(cfg.n_cells))));
  const double isd = cfg.inter_site_distance;
  for (int r = 0; r < g; ++r)
    for (int c = 0; c < g; ++c)
      sc.bs_positions.push_back({(c - (g - 1) / 2.0) * isd,
                                 (r - (g - 1) / 2.0) * isd});

  // Central cell: the BS closest to the layout centroid (ties -> lowest
  // index).  For an odd grid this is the geometric middle.
  {
    Vec2 centroid{0.0, 0.0};
    for (const auto& p : sc.bs_positions) {
      centroid.x += p.x / cfg.n_cells;
      centroid.y += p.y / cfg.n_cells;
    }
    double best = std::numeric_limits<double>::infinity();
    for (int n = 0; n < cfg.n_cells; ++n) {
      const double dist = distance(sc.bs_positions[std::size_t(n)], centroid);
      if (dist < best) {
        best = dist;
        sc.central_cell = n;
      }
    }
  }

  Rng rng(derive_seed(cfg.seed, stream_tag::kScenario));
  std::vector<double> phases;
  sc.cells.resize(std::size_t(cfg.n_cells));
  for (int n = 0; n < cfg.n_cells; ++n) {
    const int k = cfg.k_min +
                  static_cast<int>(rng.uniform_int(
                      std::uint64_t(cfg.k_max - cfg.k_min + 1)));
    const Vec2 bs = sc.bs_positions[std::size_t(n)];
    for (int i = 0; i < k; ++i) {
      // Uniform in the cell square, re-drawn while inside the exclusion disc.
      Vec2 pos;
      do {
        pos.x = bs.x + (rng.uniform() - 0.5) * isd;
        pos.y = bs.y + (rng.uniform() - 0.5) * isd;
      } while (distance(pos, bs) < cfg.min_bs_ue_distance);
      const int ue = sc.n_ues();
      sc.ue_positions.push_back(pos);
      sc.cell_of_ue.push_back(n);
      sc.cells[std::size_t(n)].push_back(ue);
      phases.push_back(2.0 * std::numbers::pi * rng.uniform());
    }
  }

  d.radio.n_antennas = cfg.n_antennas;
  d.radio.spacing_ratio = cfg.spacing_ratio;
  d.radio.rice_factor = cfg.rice_factor_linear();
  d.radio.pathloss_exponent = cfg.pathloss_exponent;
  d.radio.ref_gain = cfg.ref_gain();
  d.radio.tx_power_w = cfg.tx_power_w();
  d.radio.noise_power_w = cfg.noise_power_w();
  d.radio.ue_phase_shifts = std::move(phases);
  d.radio.validate();
  sc.validate(cfg.k_min, cfg.k_max, cfg.min_bs_ue_distance);
  return d;
}

namespace {

double norm_sq(const ChannelVector& h) {
  double acc = 0.0;
  for (const auto& c : h.coeff) acc += std::norm(c);
  return acc;
}

// MRT beamforming weights written into a preallocated buffer (the hot loop
// equivalent of mrt_beamformer).
void mrt_into(const ChannelVector& h, Beamformer& g) {
  const double n = norm_sq(h);
  if (!(n > 0.0))
    throw std::invalid_argument("mrt beamformer: zero-norm channel");
  const double inv = 1.0 / std::sqrt(n);
  g.weights.resize(h.coeff.size());
  for (std::size_t m = 0; m < h.coeff.size(); ++m)
    g.weights[m] = std::conj(h.coeff[m]) * inv;
}

// |sum_m h_m g_m|^2 without temporaries.
double beamformed_power(const ChannelVector& h, const Beamformer& g) {
  double re = 0.0, im = 0.0;
  for (std::size_t m = 0; m < h.coeff.size(); ++m) {
    const std::complex<double> p = h.coeff[m] * g.weights[m];
    re += p.real();
    im += p.imag();
  }
  return re * re + im * im;
}

}  // namespace

std::vector<int> resolve_monitored(const SimConfig& cfg,
                                   const NetworkScenario& scenario) {
  const int central = scenario.central_cell;
  std::vector<int> monitored = cfg.monitored_ues;
  if (monitored.empty()) return scenario.cells[std::size_t(central)];
  std::sort(monitored.begin(), monitored.end());
  if (std::adjacent_find(monitored.begin(), monitored.end()) !=
      monitored.end())
    throw std::invalid_argument("monitored_ues contains duplicates");
  for (int ue : monitored) {
    if (ue < 0 || ue >= scenario.n_ues())
      throw std::invalid_argument("monitored UE index out of range");
    if (scenario.cell_of_ue[std::size_t(ue)] != central)
      throw std::invalid_argument(
          "monitored UE is not served by the central cell");
  }
  return monitored;
}

SimResult run_simulation(const SimConfig& cfg) {
  SimResult res;
  res.draw = make_scenario(cfg);
  const NetworkScenario& sc = res.draw.scenario;
  const RadioParams& rp = res.draw.radio;
  const int nc = sc.n_cells();
  const int central = sc.central_cell;

  const std::vector<int> monitored = resolve_monitored(cfg, sc);

  // Static per-link fading parameters; channel draws then cost only the
  // NLOS Gaussians.
  std::vector<LinkFading> fading(std::size_t(sc.n_ues()) * nc);
  for (int ue = 0; ue < sc.n_ues(); ++ue)
    for (int cell = 0; cell < nc; ++cell)
      fading[std::size_t(ue) * nc + cell] = make_link_fading(
          sc.bs_positions[std::size_t(cell)], sc.ue_positions[std::size_t(ue)],
          rp, rp.ue_phase_shifts[std::size_t(ue)]);

  std::vector<CellSchedulerState> state;
  state.reserve(std::size_t(nc));
  for (int n = 0; n < nc; ++n)
    state.push_back(CellSchedulerState::make(
        n, sc.cells[std::size_t(n)], cfg.pf_horizon, cfg.pf_min_throughput));

  const std::int64_t total = cfg.total_ttis;
  const std::uint64_t chash = config_hash(cfg);
  res.series.resize(monitored.size());
  for (std::size_t i = 0; i < monitored.size(); ++i) {
    auto& s = res.series[i];
    s.seed = cfg.seed;
    s.config_hash = chash;
    s.ue = monitored[i];
    s.ipv_w.reserve(std::size_t(total));
    s.signal_w.reserve(std::size_t(total));
    s.served.reserve(std::size_t(total));
  }
  // Position of each monitored UE inside the central cell's service list.
  std::vector<std::size_t> mon_slot(monitored.size());
  for (std::size_t i = 0; i < monitored.size(); ++i) {
    const auto& members = sc.cells[std::size_t(central)];
    mon_slot[i] = std::size_t(
        std::find(members.begin(), members.end(), monitored[i]) -
        members.begin());
  }

  const bool pfs = cfg.scheduler == SchedulerKind::kProportionalFair;
  const double p_tx = cfg.tx_power_w();
  const double noise = cfg.noise_power_w();

  auto draw_at = [&](int ue, int cell, std::int64_t t, ChannelVector& out) {
    const std::uint64_t t_eff = cfg.freeze_fading ? 0 : std::uint64_t(t);
    Rng r(derive_seed(cfg.seed, stream_tag::kFading, std::uint64_t(ue),
                      std::uint64_t(cell), t_eff));
    sample_channel(fading[std::size_t(ue) * nc + cell], r, out);
  };

  // Preallocated per-TTI scratch.
  std::vector<ChannelVector> serving(static_cast<std::size_t>(nc));
  std::vector<Beamformer> beams(static_cast<std::size_t>(nc));
  std::vector<std::vector<ChannelVector>> member_ch(
      static_cast<std::size_t>(nc));
  for (int n = 0; n < nc; ++n)
    member_ch[std::size_t(n)].resize(sc.cells[std::size_t(n)].size());
  std::vector<double> rates;
  std::vector<int> sel(static_cast<std::size_t>(nc), -1);
  ChannelVector cross, own_scratch;

  for (std::int64_t t = 0; t < total; ++t) {
    for (int n = 0; n < nc; ++n) {
      const auto& members = sc.cells[std::size_t(n)];
      const ChannelVector* srv = nullptr;
      if (pfs) {
        auto& mch = member_ch[std::size_t(n)];
        rates.assign(members.size(), 0.0);
        for (std::size_t i = 0; i < members.size(); ++i) {
          draw_at(members[i], n, t, mch[i]);
          rates[i] = std::log2(1.0 + norm_sq(mch[i]) * p_tx / noise);
        }
        const int ue = pfs_next(state[std::size_t(n)], rates);
        const std::size_t idx = std::size_t(
            std::find(members.begin(), members.end(), ue) - members.begin());
        pfs_update(state[std::size_t(n)], ue, rates[idx]);
        sel[std::size_t(n)] = ue;
        srv = &mch[idx];
      } else {
        sel[std::size_t(n)] = rr_next(state[std::size_t(n)]);
        draw_at(sel[std::size_t(n)], n, t, serving[std::size_t(n)]);
        srv = &serving[std::size_t(n)];
      }
      mrt_into(*srv, beams[std::size_t(n)]);
    }

    for (std::size_t mi = 0; mi < monitored.size(); ++mi) {
      const int k = monitored[mi];
      const ChannelVector* own;
      if (pfs) {
        own = &member_ch[std::size_t(central)][mon_slot[mi]];
      } else if (sel[std::size_t(central)] == k) {
        own = &serving[std::size_t(central)];
      } else {
        draw_at(k, central, t, own_scratch);
        own = &own_scratch;
      }
      double ipv = 0.0;
      for (int l = 0; l < nc; ++l) {
        if (l == central) continue;
        draw_at(k, l, t, cross);
        ipv += beamformed_power(cross, beams[std::size_t(l)]) * p_tx;
      }
      auto& s = res.series[mi];
      s.ipv_w.push_back(ipv);
      s.signal_w.push_back(norm_sq(*own) * p_tx);
      s.served.push_back(sel[std::size_t(central)] == k ? 1 : 0);
    }
  }
  return res;
}

SeriesView split_series(const IpvSeries& series, std::int64_t training_len) {
  const std::int64_t n = series.n_ttis();
  if (training_len < 2 || training_len >= n)
    throw std::invalid_argument(
        "split_series: need 2 <= training_len < series length");
  SeriesView v;
  v.training_ipv_w = std::span<const double>(series.ipv_w)
                         .subspan(0, std::size_t(training_len));
  v.context_ipv_w = series.ipv_w[std::size_t(training_len - 1)];
  v.eval_ipv_w =
      std::span<const double>(series.ipv_w).subspan(std::size_t(training_len));
  v.eval_signal_w = std::span<const double>(series.signal_w)
                        .subspan(std::size_t(training_len));
  return v;
}

namespace {

constexpr char kMagic[4] = {'I', 'P', 'V', 'S'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back((unsigned char)(v >> (8 * i)));
}
void put_u64(std::vector<unsigned char>& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back((unsigned char)(v >> (8 * i)));
}
void put_f64(std::vector<unsigned char>& buf, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof bits);
  put_u64(buf, bits);
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[i]) << (8 * i);
  return v;
}
std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
  return v;
}
double get_f64(const unsigned char* p) {
  const std::uint64_t bits = get_u64(p);
  double d;
  std::memcpy(&d, &bits, sizeof d);
  return d;
}

[[noreturn]] void corrupt(const std::string& path, const std::string& why) {
  throw std::runtime_error("load_series: " + path + ": " + why);
}

}  // namespace

void save_series(const IpvSeries& series, const std::string& path) {
  const std::size_t n = series.ipv_w.size();
  if (series.signal_w.size() != n || series.served.size() != n)
    throw std::invalid_argument("save_series: inconsistent series lengths");

  std::vector<unsigned char> buf;
  buf.reserve(40 + n * 17 + 8);
  buf.insert(buf.end(), kMagic, kMagic + 4);
  put_u32(buf, kFormatVersion);
  put_u64(buf, series.seed);
  put_u64(buf, series.config_hash);
  put_u32(buf, std::uint32_t(series.ue));
  put_u32(buf, 0);  // reserved
  put_u64(buf, std::uint64_t(n));
  for (double v : series.ipv_w) put_f64(buf, v);
  for (double v : series.signal_w) put_f64(buf, v);
  buf.insert(buf.end(), series.served.begin(), series.served.end());
  put_u64(buf, fnv1a64(buf.data(), buf.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_series: cannot open " + path);
  out.write(reinterpret_cast<const char*>(buf.data()),
            std::streamsize(buf.size()));
  if (!out) throw std::runtime_error("save_series: write failed for " + path);
}

IpvSeries load_series(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) corrupt(path, "cannot open");
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (in.bad()) corrupt(path, "read failed");
  if (buf.size() < 40 + 8) corrupt(path, "truncated header");
  if (std::memcmp(buf.data(), kMagic, 4) != 0) corrupt(path, "bad magic");
  if (get_u32(buf.data() + 4) != kFormatVersion)
    corrupt(path, "unsupported format version");

  IpvSeries s;
  s.seed = get_u64(buf.data() + 8);
  s.config_hash = get_u64(buf.data() + 16);
  s.ue = int(get_u32(buf.data() + 24));
  const std::uint64_t n = get_u64(buf.data() + 32);
  const std::size_t expect = 40 + std::size_t(n) * 17 + 8;
  if (buf.size() != expect) corrupt(path, "length does not match header");
  const std::uint64_t stored = get_u64(buf.data() + buf.size() - 8);
  if (fnv1a64(buf.data(), buf.size() - 8) != stored)
    corrupt(path, "checksum mismatch");

  s.ipv_w.resize(std::size_t(n));
  s.signal_w.resize(std::size_t(n));
  s.served.resize(std::size_t(n));
  const unsigned char* p = buf.data() + 40;
  for (std::size_t i = 0; i < n; ++i, p += 8) s.ipv_w[i] = get_f64(p);
  for (std::size_t i = 0; i < n; ++i, p += 8) s.signal_w[i] = get_f64(p);
  for (std::size_t i = 0; i < n; ++i, ++p) s.served[i] = *p;
  return s;
}

void export_series_csv(const IpvSeries& series, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw std::runtime_error("export_series_csv: cannot open " + path);
  out << "tti,ipv_watts,signal_watts,served\n";
  char line[128];
  for (std::size_t i = 0; i < series.ipv_w.size(); ++i) {
    std::snprintf(line, sizeof line, "%lld,%.17g,%.17g,%u\n",
                  static_cast<long long>(i + 1), series.ipv_w[i],
                  series.signal_w[i], unsigned(series.served[i]));
    out << line;
  }
  if (!out)
    throw std::runtime_error("export_series_csv: write failed for " + path);
}

}  // namespace ipred
