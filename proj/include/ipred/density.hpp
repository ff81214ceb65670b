// SPDX-License-Identifier: Apache-2.0
//
// Nonparametric density machinery for interference power series.
//
// All estimation happens in the dB domain (10*log10 of watts, floored at
// -250 dB) where the distributions are well conditioned.  Bandwidths are
// selected with the Botev-Grotowski-Kroese diffusion fixed point; the 1D
// estimate is a direct truncated-Gaussian sum on a fixed grid, and the 2D
// joint estimate bins the lag pairs and applies the equivalent Gaussian
// smoothing spectrally (DCT diffusion with reflecting boundaries, which
// preserves probability mass exactly).

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ipred {

// Estimation grid resolution, bandwidth-selection histogram resolution,
// fractional grid padding beyond the sample range, the low-density
// threshold (relative to the marginal peak) below which conditioning falls
// back to the marginal, and the Gaussian truncation radius in sigmas.
inline constexpr int kDensityGridSize = 1024;
inline constexpr int kBandwidthBins = 16384;
inline constexpr double kGridPadFraction = 0.1;
inline constexpr double kConditionalFloorRatio = 1e-6;
inline constexpr double kKernelCutoffSigmas = 8.0;

// Power floor: 0 W maps to -250 dB so logs stay finite.
inline constexpr double kWattsFloor = 1e-25;

double watts_to_db(double watts);
double db_to_watts(double db);

// Diffusion-equation plug-in bandwidth (returned as a variance, in squared
// units of the samples).  Requires >= 8 samples with non-degenerate spread;
// throws std::invalid_argument otherwise.  When the fixed point cannot be
// bracketed the function warns on stderr and falls back to Silverman's
// rule (1.06 * sigma * n^{-1/5})^2.
double select_bandwidth(std::span<const double> samples);

struct DensityGrid1D {
  std::vector<double> grid;  // kDensityGridSize equispaced points
  std::vector<double> pdf;   // unnormalised estimate (see raw_integral)
  std::vector<double> cdf;   // normalised: cdf.front()==0, cdf.back()==1
  double bandwidth = 0.0;    // variance used by the kernel
  double raw_integral = 0.0; // trapezoid integral of pdf before normalising

  double step() const { return grid[1] - grid[0]; }
  // Linear interpolation; zero outside the grid.
  double pdf_at(double x) const;
  // Linear interpolation; clamps to 0 / 1 outside the grid.
  double cdf_at(double x) const;
  // Inverse of cdf_at by linear interpolation.  p must lie in [0, 1].
  double quantile(double p) const;
};

struct DensityGrid2D {
  std::vector<double> grid_x;  // conditioning axis (current value)
  std::vector<double> grid_y;  // predicted axis (next value)
  std::vector<double> pdf;     // row-major [ix * size_y + iy], integral ~1
  double bandwidth_x = 0.0;
  double bandwidth_y = 0.0;

  int size_x() const { return static_cast<int>(grid_x.size()); }
  int size_y() const { return static_cast<int>(grid_y.size()); }
  double at(int ix, int iy) const {
    return pdf[static_cast<std::size_t>(ix) * grid_y.size() +
               static_cast<std::size_t>(iy)];
  }
};

// One conditional distribution p(next | current = cond_db), materialised on
// the joint's y grid and renormalised to unit integral.
struct ConditionalSlice {
  double cond_db = 0.0;
  bool used_marginal_fallback = false;
  std::vector<double> grid;
  std::vector<double> pdf;
  std::vector<double> cdf;  // normalised like DensityGrid1D::cdf

  double quantile(double p) const;
  double cdf_at(double x) const;
  // Expectation of 10^(value/10) under the slice, i.e. the mean in watts.
  double mean_w() const;
};

// Direct kernel density estimate on a padded 1024-point grid.  Kernel
// contributions beyond kKernelCutoffSigmas are dropped.  If `bandwidth`
// is absent it is selected from the samples.
DensityGrid1D kde_1d(std::span<const double> samples,
                     std::optional<double> bandwidth = std::nullopt);

// Joint density of (x[t], y[t]) pairs via linear binning on a 1024x1024
// grid followed by per-axis DCT diffusion smoothing.  Per-axis bandwidths
// are selected independently from each coordinate's samples when absent.
DensityGrid2D kde_joint_2d(std::span<const double> xs,
                           std::span<const double> ys,
                           std::optional<double> bandwidth_x = std::nullopt,
                           std::optional<double> bandwidth_y = std::nullopt);

// Slice of the joint at `cond_db` (clamped to the conditioning grid).  When
// the marginal density at the conditioning value is below
// kConditionalFloorRatio times its peak the slice falls back to the
// marginal distribution and sets used_marginal_fallback.
ConditionalSlice conditional_slice(const DensityGrid2D& joint,
                                   const DensityGrid1D& marginal,
                                   double cond_db);

// Right-continuous empirical CDF of a sample set.
struct EmpiricalCdf {
  std::vector<double> sorted;

  static EmpiricalCdf from_samples(std::span<const double> samples);
  double operator()(double x) const;  // fraction of samples <= x
};

// Fitted lag-1 model of a series: marginal density of the values plus the
// joint density of consecutive pairs, with fast conditional queries.  The
// precomputed per-row cumulative integrals make a conditional quantile an
// O(log grid) operation and a conditional mean O(1), without materialising
// a slice per query.
class DensityModel {
 public:
  // Fits the marginal on the full series and the joint on (v[t], v[t+1])
  // pairs; the series must be in dB.  Requires >= 9 values.
  static DensityModel fit(std::span<const double> series_db);

  const DensityGrid1D& marginal() const { return marginal_; }
  const DensityGrid2D& joint() const { return joint_; }

  // Quantile / linear-domain mean of p(next | current = cond_db).  Falls
  // back to the marginal where its density is below the floor ratio (the
  // fallback counter tracks how often).  Results agree with materialising
  // conditional_slice() and querying it.
  double conditional_quantile(double cond_db, double p) const;
  double conditional_mean_w(double cond_db) const;

  double marginal_quantile(double p) const { return marginal_.quantile(p); }
  double marginal_mean_w() const { return marginal_mean_w_; }

  ConditionalSlice slice(double cond_db) const;

  std::int64_t fallback_count() const { return fallback_count_; }

 private:
  DensityGrid1D marginal_;
  DensityGrid2D joint_;
  // Per-row (fixed current-value) trapezoid cumulative along the next-value
  // axis, its total, and the linear-watts weighted sum, all unnormalised.
  std::vector<double> row_cum_;    // [ix * G + iy]
  std::vector<double> row_total_;  // [ix]
  std::vector<double> row_mean_num_w_;  // [ix]
  double marginal_mean_w_ = 0.0;
  double marginal_peak_ = 0.0;
  mutable std::int64_t fallback_count_ = 0;  // models are used single-threaded

  bool needs_fallback(double cond_db) const;
};

}  // namespace ipred
