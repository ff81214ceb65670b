// SPDX-License-Identifier: Apache-2.0

#include "ipred/density.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace ipred {

namespace {

constexpr double kPi = std::numbers::pi;

// FFTW plan creation/destruction is not thread-safe; execution is.
std::mutex g_fftw_mutex;

void dct2_inplace_1d(std::vector<double>& data) {
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(g_fftw_mutex);
    plan = fftw_plan_r2r_1d(static_cast<int>(data.size()), data.data(),
                            data.data(), FFTW_REDFT10, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(g_fftw_mutex);
  fftw_destroy_plan(plan);
}

void dct_inplace_2d(std::vector<double>& data, int n0, int n1,
                    fftw_r2r_kind kind) {
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(g_fftw_mutex);
    plan = fftw_plan_r2r_2d(n0, n1, data.data(), data.data(), kind, kind,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(g_fftw_mutex);
  fftw_destroy_plan(plan);
}

void require_finite(std::span<const double> samples, const char* who) {
  for (double x : samples)
    if (!std::isfinite(x))
      throw std::invalid_argument(std::string(who) + ": non-finite sample");
}

// (2s-1)!! for the stage constants of the fixed point.
constexpr std::array<double, 8> kDoubleFactorial = {
    0.0, 1.0, 3.0, 15.0, 105.0, 945.0, 10395.0, 135135.0};

// One evaluation of t - xi * gamma^[5](t): the quantity whose root is the
// optimal (squared, range-scaled) diffusion time.  `kpow[s][k]` holds
// k^(2s); `a2` holds the squared half DCT coefficients of the data
// histogram.  Returns NaN when a stage degenerates.
double fixed_point_delta(double t, double n, const std::vector<double>& a2,
                         const std::vector<std::vector<double>>& kpow) {
  constexpr int l = 7;
  const auto& k2 = kpow[1];
  const std::size_t nk = a2.size();

  auto stage_sum = [&](int s, double time) {
    const auto& kp = kpow[static_cast<std::size_t>(s)];
    double acc = 0.0;
    for (std::size_t k = 1; k < nk; ++k) {
      const double expo = k2[k] * kPi * kPi * time;
      if (expo > 900.0) break;  // exp underflow; k^2 grows monotonically
      acc += kp[k] * a2[k] * std::exp(-expo);
    }
    return acc;
  };

  double f = 2.0 * std::pow(kPi, 2.0 * l) * stage_sum(l, t);
  for (int s = l - 1; s >= 2; --s) {
    if (!(f > 0.0) || !std::isfinite(f)) return std::nan("");
    const double k0 =
        kDoubleFactorial[static_cast<std::size_t>(s)] / std::sqrt(2.0 * kPi);
    const double cst = (1.0 + std::pow(0.5, s + 0.5)) / 3.0;
    const double time =
        std::pow(2.0 * cst * k0 / (n * f), 2.0 / (3.0 + 2.0 * s));
    f = 2.0 * std::pow(kPi, 2.0 * s) * stage_sum(s, time);
  }
  if (!(f > 0.0) || !std::isfinite(f)) return std::nan("");
  return t - std::pow(2.0 * n * std::sqrt(kPi) * f, -0.4);
}

double silverman_variance(std::span<const double> samples) {
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : samples) var += (x - mean) * (x - mean);
  var /= (n - 1.0);
  const double h = 1.06 * std::sqrt(var) * std::pow(n, -0.2);
  return h * h;
}

// Grid padding: a fraction of the sample range, or kernel-scaled when the
// samples are degenerate (possible only with a caller-supplied bandwidth).
double grid_pad(double range, double bw_var) {
  double pad = kGridPadFraction * range;
  if (pad <= 0.0)
    pad = std::max(kKernelCutoffSigmas * std::sqrt(bw_var), 1e-9);
  return pad;
}

std::vector<double> make_grid(double lo, double hi, int g) {
  std::vector<double> grid(static_cast<std::size_t>(g));
  const double step = (hi - lo) / static_cast<double>(g - 1);
  for (int j = 0; j < g; ++j)
    grid[static_cast<std::size_t>(j)] = lo + step * static_cast<double>(j);
  return grid;
}

double trapezoid(const std::vector<double>& values, double step) {
  double acc = 0.0;
  for (std::size_t j = 1; j < values.size(); ++j)
    acc += 0.5 * (values[j - 1] + values[j]);
  return acc * step;
}

// Shared linear-interpolation primitives over an equispaced grid.
double interp_on_grid(const std::vector<double>& grid,
                      const std::vector<double>& values, double x,
                      double outside_lo, double outside_hi) {
  if (x <= grid.front()) return outside_lo;
  if (x >= grid.back()) return outside_hi;
  const double step = grid[1] - grid[0];
  const double f = (x - grid.front()) / step;
  std::size_t j = static_cast<std::size_t>(f);
  if (j >= grid.size() - 1) j = grid.size() - 2;
  const double t = f - static_cast<double>(j);
  return (1.0 - t) * values[j] + t * values[j + 1];
}

double quantile_from_cdf(const std::vector<double>& grid,
                         const std::vector<double>& cdf, double p) {
  if (!(p >= 0.0) || !(p <= 1.0))
    throw std::invalid_argument("quantile: p must lie in [0, 1]");
  const auto it = std::lower_bound(cdf.begin(), cdf.end(), p);
  if (it == cdf.begin()) return grid.front();
  if (it == cdf.end()) return grid.back();
  const std::size_t j = static_cast<std::size_t>(it - cdf.begin());
  const double c0 = cdf[j - 1];
  const double c1 = cdf[j];
  if (c1 <= c0) return grid[j];
  const double t = (p - c0) / (c1 - c0);
  return grid[j - 1] + t * (grid[j] - grid[j - 1]);
}

// Normalised cumulative trapezoid: cdf.front()==0, cdf.back()==1.
std::vector<double> normalised_cdf(const std::vector<double>& pdf, double step,
                                   double* raw_integral_out) {
  std::vector<double> cdf(pdf.size(), 0.0);
  for (std::size_t j = 1; j < pdf.size(); ++j)
    cdf[j] = cdf[j - 1] + 0.5 * (pdf[j - 1] + pdf[j]) * step;
  const double raw = cdf.back();
  if (raw_integral_out != nullptr) *raw_integral_out = raw;
  if (!(raw > 0.0) || !std::isfinite(raw))
    throw std::runtime_error("density: estimate has no mass on the grid");
  for (auto& c : cdf) c /= raw;
  cdf.back() = 1.0;
  return cdf;
}

double mean_linear_w(const std::vector<double>& grid,
                     const std::vector<double>& pdf, double normaliser) {
  const double step = grid[1] - grid[0];
  double acc = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double w =
        (j == 0 || j + 1 == grid.size()) ? 0.5 * step : step;
    acc += w * std::pow(10.0, grid[j] / 10.0) * pdf[j];
  }
  return acc / normaliser;
}

}  // namespace

double watts_to_db(double watts) {
  return 10.0 * std::log10(std::max(watts, kWattsFloor));
}

double db_to_watts(double db) { return std::pow(10.0, db / 10.0); }

double select_bandwidth(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 8)
    throw std::invalid_argument("select_bandwidth: need at least 8 samples");
  require_finite(samples, "select_bandwidth");

  const auto [mn_it, mx_it] = std::minmax_element(samples.begin(), samples.end());
  const double mn = *mn_it;
  const double mx = *mx_it;
  if (!(mx > mn))
    throw std::invalid_argument(
        "select_bandwidth: degenerate samples (zero spread)");

  const double lo = mn - kGridPadFraction * (mx - mn);
  const double hi = mx + kGridPadFraction * (mx - mn);
  const double range = hi - lo;

  // Histogram of the samples scaled to [0, 1), then its DCT-II spectrum.
  const int nb = kBandwidthBins;
  std::vector<double> hist(static_cast<std::size_t>(nb), 0.0);
  for (double x : samples) {
    int idx = static_cast<int>((x - lo) / range * nb);
    idx = std::clamp(idx, 0, nb - 1);
    hist[static_cast<std::size_t>(idx)] += 1.0 / static_cast<double>(n);
  }
  dct2_inplace_1d(hist);

  std::vector<double> a2(static_cast<std::size_t>(nb), 0.0);
  for (int k = 1; k < nb; ++k) {
    const double half = 0.5 * hist[static_cast<std::size_t>(k)];
    a2[static_cast<std::size_t>(k)] = half * half;
  }

  // k^(2s) tables for the stage sums, s = 1..7.
  std::vector<std::vector<double>> kpow(8);
  kpow[1].resize(static_cast<std::size_t>(nb));
  for (int k = 0; k < nb; ++k)
    kpow[1][static_cast<std::size_t>(k)] =
        static_cast<double>(k) * static_cast<double>(k);
  for (int s = 2; s <= 7; ++s) {
    kpow[static_cast<std::size_t>(s)].resize(static_cast<std::size_t>(nb));
    for (int k = 0; k < nb; ++k)
      kpow[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)] =
          kpow[static_cast<std::size_t>(s - 1)][static_cast<std::size_t>(k)] *
          kpow[1][static_cast<std::size_t>(k)];
  }

  const double nn = static_cast<double>(n);
  auto delta = [&](double t) { return fixed_point_delta(t, nn, a2, kpow); };

  // Bracket the root by doubling the upper end from a sample-size-dependent
  // initial tolerance, then refine with 50 bisections.
  const double nc = std::clamp(nn, 50.0, 1050.0);
  double tol = 1e-12 + 0.01 * (nc - 50.0) / 1000.0;
  const double f_lo = delta(0.0);
  double t_star = std::nan("");
  if (std::isfinite(f_lo)) {
    for (;;) {
      const double f_hi = delta(tol);
      if (!std::isfinite(f_hi)) break;
      if ((f_lo < 0.0) != (f_hi < 0.0)) {
        double a = 0.0, b = tol, fa = f_lo;
        bool bad = false;
        for (int it = 0; it < 50; ++it) {
          const double m = 0.5 * (a + b);
          const double fm = delta(m);
          if (!std::isfinite(fm)) {
            bad = true;
            break;
          }
          if ((fm < 0.0) == (fa < 0.0)) {
            a = m;
            fa = fm;
          } else {
            b = m;
          }
        }
        if (!bad) t_star = 0.5 * (a + b);
        break;
      }
      if (tol >= 0.1) break;
      tol = std::min(tol * 2.0, 0.1);
    }
  }

  if (!std::isfinite(t_star) || !(t_star > 0.0)) {
    std::cerr << "warning: select_bandwidth: diffusion fixed point did not "
                 "bracket a root; falling back to Silverman's rule\n";
    return silverman_variance(samples);
  }
  return t_star * range * range;
}

double DensityGrid1D::pdf_at(double x) const {
  return interp_on_grid(grid, pdf, x, 0.0, 0.0);
}

double DensityGrid1D::cdf_at(double x) const {
  return interp_on_grid(grid, cdf, x, 0.0, 1.0);
}

double DensityGrid1D::quantile(double p) const {
  return quantile_from_cdf(grid, cdf, p);
}

DensityGrid1D kde_1d(std::span<const double> samples,
                     std::optional<double> bandwidth) {
  const std::size_t n = samples.size();
  if (n < 8) throw std::invalid_argument("kde_1d: need at least 8 samples");
  require_finite(samples, "kde_1d");

  DensityGrid1D out;
  out.bandwidth = bandwidth ? *bandwidth : select_bandwidth(samples);
  if (!(out.bandwidth > 0.0) || !std::isfinite(out.bandwidth))
    throw std::invalid_argument("kde_1d: bandwidth must be positive");

  const auto [mn_it, mx_it] = std::minmax_element(samples.begin(), samples.end());
  const double pad = grid_pad(*mx_it - *mn_it, out.bandwidth);
  const int g = kDensityGridSize;
  out.grid = make_grid(*mn_it - pad, *mx_it + pad, g);
  const double lo = out.grid.front();
  const double step = out.grid[1] - out.grid[0];

  out.pdf.assign(static_cast<std::size_t>(g), 0.0);
  const double sigma = std::sqrt(out.bandwidth);
  const double cut = kKernelCutoffSigmas * sigma;
  for (double x : samples) {
    int jlo = static_cast<int>(std::ceil((x - cut - lo) / step));
    int jhi = static_cast<int>(std::floor((x + cut - lo) / step));
    // Always touch the grid points bracketing the sample so a bandwidth far
    // below the grid resolution still deposits mass.
    const int j0 = std::clamp(static_cast<int>((x - lo) / step), 0, g - 1);
    jlo = std::min(jlo, j0);
    jhi = std::max(jhi, std::min(j0 + 1, g - 1));
    jlo = std::max(jlo, 0);
    jhi = std::min(jhi, g - 1);
    for (int j = jlo; j <= jhi; ++j) {
      const double d = (out.grid[static_cast<std::size_t>(j)] - x) / sigma;
      out.pdf[static_cast<std::size_t>(j)] += std::exp(-0.5 * d * d);
    }
  }
  const double norm =
      1.0 / (static_cast<double>(n) * sigma * std::sqrt(2.0 * kPi));
  for (auto& v : out.pdf) v *= norm;

  out.cdf = normalised_cdf(out.pdf, step, &out.raw_integral);
  return out;
}

DensityGrid2D kde_joint_2d(std::span<const double> xs,
                           std::span<const double> ys,
                           std::optional<double> bandwidth_x,
                           std::optional<double> bandwidth_y) {
  const std::size_t m = xs.size();
  if (ys.size() != m)
    throw std::invalid_argument("kde_joint_2d: coordinate size mismatch");
  if (m < 8) throw std::invalid_argument("kde_joint_2d: need at least 8 pairs");
  require_finite(xs, "kde_joint_2d");
  require_finite(ys, "kde_joint_2d");

  DensityGrid2D out;
  out.bandwidth_x = bandwidth_x ? *bandwidth_x : select_bandwidth(xs);
  out.bandwidth_y = bandwidth_y ? *bandwidth_y : select_bandwidth(ys);
  if (!(out.bandwidth_x > 0.0) || !(out.bandwidth_y > 0.0))
    throw std::invalid_argument("kde_joint_2d: bandwidths must be positive");

  const int g = kDensityGridSize;
  {
    const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
    const double pad = grid_pad(*mx - *mn, out.bandwidth_x);
    out.grid_x = make_grid(*mn - pad, *mx + pad, g);
  }
  {
    const auto [mn, mx] = std::minmax_element(ys.begin(), ys.end());
    const double pad = grid_pad(*mx - *mn, out.bandwidth_y);
    out.grid_y = make_grid(*mn - pad, *mx + pad, g);
  }
  const double lox = out.grid_x.front();
  const double loy = out.grid_y.front();
  const double stepx = out.grid_x[1] - out.grid_x[0];
  const double stepy = out.grid_y[1] - out.grid_y[0];

  // Linear (cloud-in-cell) binning of the pairs; total mass 1.
  std::vector<double> mass(static_cast<std::size_t>(g) * g, 0.0);
  const double w = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double fx = (xs[i] - lox) / stepx;
    const double fy = (ys[i] - loy) / stepy;
    int ix = std::clamp(static_cast<int>(fx), 0, g - 2);
    int iy = std::clamp(static_cast<int>(fy), 0, g - 2);
    const double tx = std::clamp(fx - ix, 0.0, 1.0);
    const double ty = std::clamp(fy - iy, 0.0, 1.0);
    const std::size_t base =
        static_cast<std::size_t>(ix) * g + static_cast<std::size_t>(iy);
    mass[base] += w * (1.0 - tx) * (1.0 - ty);
    mass[base + 1] += w * (1.0 - tx) * ty;
    mass[base + static_cast<std::size_t>(g)] += w * tx * (1.0 - ty);
    mass[base + static_cast<std::size_t>(g) + 1] += w * tx * ty;
  }

  // Spectral Gaussian smoothing: DCT-II -> per-axis diffusion multiplier
  // -> DCT-III.  Reflecting boundaries keep the total mass at exactly 1.
  dct_inplace_2d(mass, g, g, FFTW_REDFT10);
  const double tx_diff = out.bandwidth_x / ((out.grid_x.back() - lox) *
                                            (out.grid_x.back() - lox));
  const double ty_diff = out.bandwidth_y / ((out.grid_y.back() - loy) *
                                            (out.grid_y.back() - loy));
  std::vector<double> ey(static_cast<std::size_t>(g));
  for (int k = 0; k < g; ++k)
    ey[static_cast<std::size_t>(k)] =
        std::exp(-0.5 * k * k * kPi * kPi * ty_diff);
  for (int kx = 0; kx < g; ++kx) {
    const double ex = std::exp(-0.5 * kx * kx * kPi * kPi * tx_diff);
    double* row = &mass[static_cast<std::size_t>(kx) * g];
    for (int ky = 0; ky < g; ++ky)
      row[ky] *= ex * ey[static_cast<std::size_t>(ky)];
  }
  dct_inplace_2d(mass, g, g, FFTW_REDFT01);
  const double inv_scale = 1.0 / (4.0 * static_cast<double>(g) *
                                  static_cast<double>(g));
  const double to_density = 1.0 / (stepx * stepy);
  out.pdf.resize(mass.size());
  for (std::size_t i = 0; i < mass.size(); ++i)
    out.pdf[i] = std::max(mass[i] * inv_scale, 0.0) * to_density;
  return out;
}

double ConditionalSlice::quantile(double p) const {
  return quantile_from_cdf(grid, cdf, p);
}

double ConditionalSlice::cdf_at(double x) const {
  return interp_on_grid(grid, cdf, x, 0.0, 1.0);
}

double ConditionalSlice::mean_w() const {
  return mean_linear_w(grid, pdf, 1.0);
}

namespace {

double marginal_peak(const DensityGrid1D& marginal) {
  double peak = 0.0;
  for (double v : marginal.pdf) peak = std::max(peak, v);
  return peak;
}

ConditionalSlice marginal_as_slice(const DensityGrid1D& marginal,
                                   double cond_db) {
  ConditionalSlice s;
  s.cond_db = cond_db;
  s.used_marginal_fallback = true;
  s.grid = marginal.grid;
  s.pdf = marginal.pdf;
  for (auto& v : s.pdf) v /= marginal.raw_integral;
  double raw = 0.0;
  s.cdf = normalised_cdf(s.pdf, marginal.step(), &raw);
  return s;
}

}  // namespace

ConditionalSlice conditional_slice(const DensityGrid2D& joint,
                                   const DensityGrid1D& marginal,
                                   double cond_db) {
  if (!std::isfinite(cond_db))
    throw std::invalid_argument("conditional_slice: non-finite value");
  const double peak = marginal_peak(marginal);
  if (marginal.pdf_at(cond_db) < kConditionalFloorRatio * peak)
    return marginal_as_slice(marginal, cond_db);

  const double x =
      std::clamp(cond_db, joint.grid_x.front(), joint.grid_x.back());
  const double stepx = joint.grid_x[1] - joint.grid_x[0];
  const double fx = (x - joint.grid_x.front()) / stepx;
  const int ix = std::clamp(static_cast<int>(fx), 0, joint.size_x() - 2);
  const double t = std::clamp(fx - ix, 0.0, 1.0);

  ConditionalSlice s;
  s.cond_db = cond_db;
  s.grid = joint.grid_y;
  s.pdf.resize(s.grid.size());
  for (int j = 0; j < joint.size_y(); ++j)
    s.pdf[static_cast<std::size_t>(j)] =
        (1.0 - t) * joint.at(ix, j) + t * joint.at(ix + 1, j);

  const double stepy = joint.grid_y[1] - joint.grid_y[0];
  const double total = trapezoid(s.pdf, stepy);
  if (!(total > 0.0) || !std::isfinite(total))
    return marginal_as_slice(marginal, cond_db);
  for (auto& v : s.pdf) v /= total;
  double raw = 0.0;
  s.cdf = normalised_cdf(s.pdf, stepy, &raw);
  return s;
}

EmpiricalCdf EmpiricalCdf::from_samples(std::span<const double> samples) {
  if (samples.empty())
    throw std::invalid_argument("EmpiricalCdf: no samples");
  EmpiricalCdf e;
  e.sorted.assign(samples.begin(), samples.end());
  std::sort(e.sorted.begin(), e.sorted.end());
  return e;
}

double EmpiricalCdf::operator()(double x) const {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  return static_cast<double>(it - sorted.begin()) /
         static_cast<double>(sorted.size());
}

DensityModel DensityModel::fit(std::span<const double> series_db) {
  if (series_db.size() < 9)
    throw std::invalid_argument(
        "DensityModel: need at least 9 values (8 lag pairs)");

  DensityModel m;
  m.marginal_ = kde_1d(series_db);
  m.joint_ = kde_joint_2d(series_db.subspan(0, series_db.size() - 1),
                          series_db.subspan(1));

  const int gx = m.joint_.size_x();
  const int gy = m.joint_.size_y();
  const double stepy = m.joint_.grid_y[1] - m.joint_.grid_y[0];
  std::vector<double> lin_y(static_cast<std::size_t>(gy));
  for (int j = 0; j < gy; ++j)
    lin_y[static_cast<std::size_t>(j)] =
        std::pow(10.0, m.joint_.grid_y[static_cast<std::size_t>(j)] / 10.0);

  m.row_cum_.assign(static_cast<std::size_t>(gx) * gy, 0.0);
  m.row_total_.assign(static_cast<std::size_t>(gx), 0.0);
  m.row_mean_num_w_.assign(static_cast<std::size_t>(gx), 0.0);
  for (int ix = 0; ix < gx; ++ix) {
    double* cum = &m.row_cum_[static_cast<std::size_t>(ix) * gy];
    double acc = 0.0;
    double num = 0.5 * stepy * lin_y[0] * m.joint_.at(ix, 0);
    cum[0] = 0.0;
    for (int j = 1; j < gy; ++j) {
      acc += 0.5 * (m.joint_.at(ix, j - 1) + m.joint_.at(ix, j)) * stepy;
      cum[j] = acc;
      const double w = (j + 1 == gy) ? 0.5 * stepy : stepy;
      num += w * lin_y[static_cast<std::size_t>(j)] * m.joint_.at(ix, j);
    }
    m.row_total_[static_cast<std::size_t>(ix)] = acc;
    m.row_mean_num_w_[static_cast<std::size_t>(ix)] = num;
  }

  m.marginal_peak_ = marginal_peak(m.marginal_);
  m.marginal_mean_w_ =
      mean_linear_w(m.marginal_.grid, m.marginal_.pdf, m.marginal_.raw_integral);
  return m;
}

bool DensityModel::needs_fallback(double cond_db) const {
  return marginal_.pdf_at(cond_db) < kConditionalFloorRatio * marginal_peak_;
}

double DensityModel::conditional_quantile(double cond_db, double p) const {
  if (!(p >= 0.0) || !(p <= 1.0))
    throw std::invalid_argument("conditional_quantile: p must lie in [0, 1]");
  if (needs_fallback(cond_db)) {
    ++fallback_count_;
    return marginal_.quantile(p);
  }

  const double x =
      std::clamp(cond_db, joint_.grid_x.front(), joint_.grid_x.back());
  const double stepx = joint_.grid_x[1] - joint_.grid_x[0];
  const double fx = (x - joint_.grid_x.front()) / stepx;
  const int ix = std::clamp(static_cast<int>(fx), 0, joint_.size_x() - 2);
  const double t = std::clamp(fx - ix, 0.0, 1.0);
  const int gy = joint_.size_y();
  const double* c0 = &row_cum_[static_cast<std::size_t>(ix) * gy];
  const double* c1 = c0 + gy;
  const double total = (1.0 - t) * row_total_[static_cast<std::size_t>(ix)] +
                       t * row_total_[static_cast<std::size_t>(ix + 1)];
  if (!(total > 0.0) || !std::isfinite(total)) {
    ++fallback_count_;
    return marginal_.quantile(p);
  }

  const double target = p * total;
  auto mixed = [&](int j) {
    return (1.0 - t) * c0[j] + t * c1[j];
  };
  int lo = 0, hi = gy - 1;
  while (lo < hi) {  // smallest j with mixed(j) >= target
    const int mid = (lo + hi) / 2;
    if (mixed(mid) >= target)
      hi = mid;
    else
      lo = mid + 1;
  }
  if (lo == 0) return joint_.grid_y.front();
  const double v0 = mixed(lo - 1);
  const double v1 = mixed(lo);
  if (v1 <= v0) return joint_.grid_y[static_cast<std::size_t>(lo)];
  const double frac = (target - v0) / (v1 - v0);
  return joint_.grid_y[static_cast<std::size_t>(lo - 1)] +
         frac * (joint_.grid_y[1] - joint_.grid_y[0]);
}

double DensityModel::conditional_mean_w(double cond_db) const {
  if (needs_fallback(cond_db)) {
    ++fallback_count_;
    return marginal_mean_w_;
  }
  const double x =
      std::clamp(cond_db, joint_.grid_x.front(), joint_.grid_x.back());
  const double stepx = joint_.grid_x[1] - joint_.grid_x[0];
  const double fx = (x - joint_.grid_x.front()) / stepx;
  const int ix = std::clamp(static_cast<int>(fx), 0, joint_.size_x() - 2);
  const double t = std::clamp(fx - ix, 0.0, 1.0);
  const double total = (1.0 - t) * row_total_[static_cast<std::size_t>(ix)] +
                       t * row_total_[static_cast<std::size_t>(ix + 1)];
  if (!(total > 0.0) || !std::isfinite(total)) {
    ++fallback_count_;
    return marginal_mean_w_;
  }
  const double num =
      (1.0 - t) * row_mean_num_w_[static_cast<std::size_t>(ix)] +
      t * row_mean_num_w_[static_cast<std::size_t>(ix + 1)];
  return num / total;
}

ConditionalSlice DensityModel::slice(double cond_db) const {
  ConditionalSlice s = conditional_slice(joint_, marginal_, cond_db);
  if (s.used_marginal_fallback) ++fallback_count_;
  return s;
}

}  // namespace ipred
