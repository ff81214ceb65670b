// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ipred/density.hpp"
#include "ipred/rng.hpp"
#include "oracles.hpp"

using namespace ipred;

namespace {

std::vector<double> standard_normal_samples(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = rng.normal();
  return out;
}

// Shared fixtures (fitting is the slow part; reuse across test cases).
const std::vector<double>& markov_series() {
  static const std::vector<double> series = [] {
    Rng rng(5151);
    // Sized so the conditional rows (which only see the pairs near the
    // conditioning value) have enough mass for tight L1 comparisons.
    return oracle::Markov2State{}.generate(60000, rng);
  }();
  return series;
}

const DensityModel& markov_model() {
  static const DensityModel model = DensityModel::fit(markov_series());
  return model;
}

}  // namespace

TEST_CASE("density: dB conversions floor at the minimum power") {
  CHECK(watts_to_db(1.0) == doctest::Approx(0.0));
  CHECK(watts_to_db(1e-10) == doctest::Approx(-100.0));
  CHECK(watts_to_db(0.0) == doctest::Approx(-250.0));
  CHECK(watts_to_db(-1.0) == doctest::Approx(-250.0));  // floored, not NaN
  CHECK(db_to_watts(-100.0) == doctest::Approx(1e-10));
  CHECK(db_to_watts(watts_to_db(3.7e-9)) == doctest::Approx(3.7e-9));
}

TEST_CASE("density: select_bandwidth input validation") {
  std::vector<double> tiny{1, 2, 3};
  CHECK_THROWS_AS((void)select_bandwidth(tiny), std::invalid_argument);
  std::vector<double> flat(100, 4.2);
  CHECK_THROWS_AS((void)select_bandwidth(flat), std::invalid_argument);
  std::vector<double> with_nan = standard_normal_samples(100, 1);
  with_nan[50] = std::nan("");
  CHECK_THROWS_AS((void)select_bandwidth(with_nan), std::invalid_argument);
}

TEST_CASE("density: select_bandwidth scales as the square of the data") {
  const auto xs = standard_normal_samples(2000, 77);
  std::vector<double> xs4(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) xs4[i] = 4.0 * xs[i];
  const double g1 = select_bandwidth(xs);
  const double g2 = select_bandwidth(xs4);
  CHECK(g2 == doctest::Approx(16.0 * g1).epsilon(1e-9));

  std::vector<double> shifted(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) shifted[i] = xs[i] + 100.0;
  CHECK(select_bandwidth(shifted) == doctest::Approx(g1).epsilon(1e-6));
}

TEST_CASE("density: select_bandwidth lands near the plug-in scale") {
  const auto xs = standard_normal_samples(4000, 99);
  const double gamma = select_bandwidth(xs);
  // Silverman's variance for this n as an order-of-magnitude anchor.
  const double h_s = 1.06 * std::pow(4000.0, -0.2);
  CHECK(gamma > h_s * h_s / 4.0);
  CHECK(gamma < h_s * h_s * 4.0);
}

TEST_CASE("density: kde_1d recovers a standard normal (ISE < 1e-3)") {
  const auto xs = standard_normal_samples(4000, 2);
  const DensityGrid1D est = kde_1d(xs);
  REQUIRE(est.grid.size() == std::size_t(kDensityGridSize));
  CHECK(est.raw_integral == doctest::Approx(1.0).epsilon(0.01));
  CHECK(est.cdf.front() == 0.0);
  CHECK(est.cdf.back() == 1.0);

  double ise = 0.0;
  for (std::size_t j = 0; j < est.grid.size(); ++j) {
    const double diff = est.pdf[j] - oracle::normal_pdf(est.grid[j], 0.0, 1.0);
    ise += diff * diff;
  }
  ise *= est.step();
  CHECK(ise < 1e-3);
}

TEST_CASE("density: kde_1d grid covers the padded sample range") {
  const auto xs = standard_normal_samples(500, 3);
  const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
  const DensityGrid1D est = kde_1d(xs);
  const double pad = 0.1 * (*mx - *mn);
  CHECK(est.grid.front() == doctest::Approx(*mn - pad));
  CHECK(est.grid.back() == doctest::Approx(*mx + pad));
  for (double v : est.pdf) CHECK(v >= 0.0);
}

TEST_CASE("density: kde_1d respects a caller-supplied bandwidth") {
  const auto xs = standard_normal_samples(500, 4);
  const DensityGrid1D est = kde_1d(xs, 0.25);
  CHECK(est.bandwidth == 0.25);
}

TEST_CASE("density: kde_1d peaks at a repeated cluster") {
  std::vector<double> xs(200, -77.0);
  const DensityGrid1D est = kde_1d(xs, 0.04);
  const auto it = std::max_element(est.pdf.begin(), est.pdf.end());
  const double peak_at = est.grid[std::size_t(it - est.pdf.begin())];
  CHECK(peak_at == doctest::Approx(-77.0).epsilon(0.01));
  CHECK(est.raw_integral == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("density: kde_1d resolves well-separated modes") {
  Rng rng(6);
  std::vector<double> xs;
  for (int i = 0; i < 2000; ++i)
    xs.push_back((i % 2 == 0 ? -5.0 : 5.0) + rng.normal());
  const DensityGrid1D est = kde_1d(xs);
  // Density near each mode should dwarf the density at the valley.
  const double at_m = est.pdf_at(-5.0);
  const double at_p = est.pdf_at(5.0);
  const double at_0 = est.pdf_at(0.0);
  CHECK(at_m > 10.0 * at_0);
  CHECK(at_p > 10.0 * at_0);
}

TEST_CASE("density: quantile and cdf are consistent inverses") {
  const auto xs = standard_normal_samples(3000, 7);
  const DensityGrid1D est = kde_1d(xs);
  const double tol = 1.0 / kDensityGridSize + 1e-6;
  for (double p : {0.001, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999}) {
    const double q = est.quantile(p);
    CHECK(std::abs(est.cdf_at(q) - p) <= tol);
  }
  CHECK(est.quantile(0.0) == est.grid.front());
  CHECK(est.quantile(1.0) == est.grid.back());
  CHECK_THROWS_AS((void)est.quantile(1.5), std::invalid_argument);
}

TEST_CASE("density: kde_1d quantiles approximate normal quantiles") {
  const auto xs = standard_normal_samples(20000, 8);
  const DensityGrid1D est = kde_1d(xs);
  for (double p : {0.05, 0.25, 0.5, 0.75, 0.95, 0.99}) {
    CHECK(est.quantile(p) ==
          doctest::Approx(oracle::normal_quantile(p)).epsilon(0.08));
  }
  // Phi^{-1}(0.99) = 2.3263
  CHECK(est.quantile(0.99) == doctest::Approx(2.3263).epsilon(0.05));
}

TEST_CASE("density: kde_joint_2d conserves mass and stays non-negative") {
  const auto& series = markov_series();
  const std::span<const double> s(series);
  const DensityGrid2D joint = kde_joint_2d(s.subspan(0, 4000), s.subspan(1, 4000));
  double mass = 0.0;
  const double stepx = joint.grid_x[1] - joint.grid_x[0];
  const double stepy = joint.grid_y[1] - joint.grid_y[0];
  for (int ix = 0; ix < joint.size_x(); ++ix)
    for (int iy = 0; iy < joint.size_y(); ++iy) {
      const double wx = (ix == 0 || ix + 1 == joint.size_x()) ? 0.5 : 1.0;
      const double wy = (iy == 0 || iy + 1 == joint.size_y()) ? 0.5 : 1.0;
      const double v = joint.at(ix, iy);
      REQUIRE(v >= 0.0);
      mass += wx * wy * v;
    }
  mass *= stepx * stepy;
  CHECK(mass == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("density: joint marginalised over next matches the 1d estimate") {
  const auto& series = markov_series();
  const std::span<const double> s(series);
  const auto xs = s.subspan(0, 4000);
  const double bw = select_bandwidth(xs);
  const DensityGrid2D joint = kde_joint_2d(xs, s.subspan(1, 4000), bw, bw);
  const DensityGrid1D marg = kde_1d(xs, bw);

  const double stepy = joint.grid_y[1] - joint.grid_y[0];
  double l1 = 0.0;
  const double stepx = joint.grid_x[1] - joint.grid_x[0];
  for (int ix = 0; ix < joint.size_x(); ++ix) {
    double row = 0.0;
    for (int iy = 0; iy < joint.size_y(); ++iy) {
      const double wy = (iy == 0 || iy + 1 == joint.size_y()) ? 0.5 : 1.0;
      row += wy * joint.at(ix, iy);
    }
    row *= stepy;
    l1 += std::abs(row - marg.pdf_at(joint.grid_x[std::size_t(ix)])) * stepx;
  }
  CHECK(l1 < 0.05);
}

TEST_CASE("density: conditional slices match the Markov oracle rows") {
  const oracle::Markov2State chain;
  const auto& model = markov_model();

  for (double cond : {chain.mu0, chain.mu1}) {
    const ConditionalSlice slice = model.slice(cond);
    CHECK_FALSE(slice.used_marginal_fallback);
    const oracle::GaussMix2 truth = chain.conditional_next(cond);
    // The estimate targets the kernel-smoothed density: each component is
    // widened by the prediction-axis bandwidth (a variance).
    oracle::GaussMix2 smoothed = truth;
    smoothed.sigma = std::sqrt(truth.sigma * truth.sigma +
                               model.joint().bandwidth_y);
    double l1_smoothed = 0.0;
    double l1_raw = 0.0;
    const double step = slice.grid[1] - slice.grid[0];
    for (std::size_t j = 0; j < slice.grid.size(); ++j) {
      l1_smoothed +=
          std::abs(slice.pdf[j] - smoothed.pdf(slice.grid[j])) * step;
      l1_raw += std::abs(slice.pdf[j] - truth.pdf(slice.grid[j])) * step;
    }
    // The conditional row only sees the pairs near the conditioning value
    // (a few thousand effective samples here), which bounds its accuracy.
    CHECK(l1_smoothed < 0.08);
    CHECK(l1_raw < 0.12);  // raw truth, smoothing bias included
  }
}

TEST_CASE("density: slices agree with a direct product-kernel estimate") {
  // The spectral (binned DCT diffusion) joint must reproduce what the plain
  // O(n * grid) product-kernel estimator computes from the same pairs and
  // bandwidths.  This pins the implementation, independent of any
  // statistical reference.
  const auto& series = markov_series();
  const auto& model = markov_model();
  const double bwx = model.joint().bandwidth_x;
  const double bwy = model.joint().bandwidth_y;
  const std::size_t n = series.size() - 1;

  for (double cond : {-95.0, -93.5, -86.5, -85.0}) {
    const ConditionalSlice slice = model.slice(cond);
    REQUIRE_FALSE(slice.used_marginal_fallback);
    std::vector<double> direct(slice.grid.size(), 0.0);
    double wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = series[i] - cond;
      const double w = std::exp(-0.5 * dx * dx / bwx);
      if (w < 1e-12) continue;
      wsum += w;
      for (std::size_t j = 0; j < slice.grid.size(); ++j) {
        const double dy = slice.grid[j] - series[i + 1];
        direct[j] += w * std::exp(-0.5 * dy * dy / bwy);
      }
    }
    REQUIRE(wsum > 0.0);
    const double norm =
        wsum * std::sqrt(2.0 * 3.14159265358979324 * bwy);
    double l1 = 0.0;
    const double step = slice.grid[1] - slice.grid[0];
    for (std::size_t j = 0; j < slice.grid.size(); ++j)
      l1 += std::abs(slice.pdf[j] - direct[j] / norm) * step;
    CHECK(l1 < 0.01);
  }
}

TEST_CASE("density: conditional quantiles match the Markov oracle") {
  const oracle::Markov2State chain;
  const auto& model = markov_model();
  for (double cond : {chain.mu0, chain.mu1}) {
    const oracle::GaussMix2 truth = chain.conditional_next(cond);
    for (double p : {0.1, 0.5, 0.9, 0.99}) {
      CHECK(model.conditional_quantile(cond, p) ==
            doctest::Approx(truth.quantile(p)).epsilon(0.02));
    }
  }
}

TEST_CASE("density: conditional linear mean matches the mixture formula") {
  const oracle::Markov2State chain;
  const auto& model = markov_model();
  for (double cond : {chain.mu0, chain.mu1}) {
    const oracle::GaussMix2 truth = chain.conditional_next(cond);
    CHECK(model.conditional_mean_w(cond) ==
          doctest::Approx(truth.mean_linear_w()).epsilon(0.05));
  }
}

TEST_CASE("density: marginal linear mean matches the lognormal formula") {
  const oracle::Markov2State chain;
  const auto& model = markov_model();
  CHECK(model.marginal_mean_w() ==
        doctest::Approx(chain.marginal().mean_linear_w()).epsilon(0.05));
}

TEST_CASE("density: fast conditional queries equal materialised slices") {
  const auto& model = markov_model();
  for (double cond : {-96.0, -91.5, -85.0, -88.3}) {
    const ConditionalSlice slice = model.slice(cond);
    for (double p : {0.05, 0.3, 0.5, 0.77, 0.95, 0.999}) {
      CHECK(model.conditional_quantile(cond, p) ==
            doctest::Approx(slice.quantile(p)).epsilon(1e-9));
    }
    CHECK(model.conditional_mean_w(cond) ==
          doctest::Approx(slice.mean_w()).epsilon(1e-9));
  }
}

TEST_CASE("density: conditioning in a density hole falls back to marginal") {
  const auto& model = markov_model();
  const std::int64_t before = model.fallback_count();
  const double far = -200.0;  // far outside the data support
  const ConditionalSlice slice = model.slice(far);
  CHECK(slice.used_marginal_fallback);
  CHECK(model.fallback_count() == before + 1);

  const double q = model.conditional_quantile(far, 0.9);
  CHECK(q == doctest::Approx(model.marginal_quantile(0.9)));
  CHECK(model.fallback_count() == before + 2);
  // The fallback slice reproduces the marginal distribution.
  CHECK(slice.quantile(0.9) ==
        doctest::Approx(model.marginal_quantile(0.9)).epsilon(1e-9));
}

TEST_CASE("density: conditional slice integrates to one") {
  const auto& model = markov_model();
  for (double cond : {-95.0, -85.0, -200.0}) {
    const ConditionalSlice slice = model.slice(cond);
    const double step = slice.grid[1] - slice.grid[0];
    CHECK(oracle::trapezoid(slice.pdf, step) ==
          doctest::Approx(1.0).epsilon(0.01));
    CHECK(slice.cdf.front() == 0.0);
    CHECK(slice.cdf.back() == 1.0);
  }
}

TEST_CASE("density: model fit input validation") {
  std::vector<double> eight{1, 2, 3, 4, 5, 6, 7, 8};
  CHECK_THROWS_AS((void)DensityModel::fit(eight), std::invalid_argument);
  std::vector<double> seven{1, 2, 3, 4, 5, 6, 7};
  CHECK_THROWS_AS((void)kde_joint_2d(seven, seven), std::invalid_argument);
  CHECK_THROWS_AS((void)kde_1d(seven), std::invalid_argument);
}

TEST_CASE("density: empirical cdf is a right-continuous step function") {
  const std::vector<double> xs{3.0, 1.0, 2.0, 2.0};
  const EmpiricalCdf ecdf = EmpiricalCdf::from_samples(xs);
  CHECK(ecdf(0.5) == 0.0);
  CHECK(ecdf(1.0) == doctest::Approx(0.25));
  CHECK(ecdf(1.5) == doctest::Approx(0.25));
  CHECK(ecdf(2.0) == doctest::Approx(0.75));
  CHECK(ecdf(3.0) == doctest::Approx(1.0));
  CHECK(ecdf(99.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS((void)EmpiricalCdf::from_samples(std::vector<double>{}),
                  std::invalid_argument);
}

TEST_CASE("density: MQ-style quantile calibration on the Markov oracle") {
  // Predicting the (1-gamma) conditional quantile should be exceeded with
  // rate ~gamma on fresh data from the same chain.
  const oracle::Markov2State chain;
  const auto& model = markov_model();
  Rng rng(997);
  const auto fresh = chain.generate(50000, rng);
  const double gamma = 0.05;
  std::size_t exceed = 0;
  for (std::size_t t = 0; t + 1 < fresh.size(); ++t) {
    const double pred = model.conditional_quantile(fresh[t], 1.0 - gamma);
    if (fresh[t + 1] > pred) ++exceed;
  }
  const double rate = double(exceed) / double(fresh.size() - 1);
  const double tol =
      std::max(0.3 * gamma, 3.0 / std::sqrt(double(fresh.size() - 1)));
  CHECK(std::abs(rate - gamma) <= tol);
}
