// SPDX-License-Identifier: Apache-2.0
//
// Test-only reference implementations ("oracles") kept deliberately
// independent of the library code they check: closed-form Gaussian-mixture
// distributions, a two-state Markov generator with known conditionals, and
// small numeric helpers.  Everything here trades speed for obviousness.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "ipred/rng.hpp"

namespace oracle {

inline double normal_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) /
         (sigma * std::sqrt(2.0 * std::numbers::pi));
}

inline double normal_cdf(double x, double mu = 0.0, double sigma = 1.0) {
  return 0.5 * std::erfc(-(x - mu) / (sigma * std::sqrt(2.0)));
}

// Inverse standard normal CDF by bisection (slow, obviously correct).
inline double normal_quantile(double p) {
  double lo = -12.0, hi = 12.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// A two-component Gaussian mixture with everything closed-form.
struct GaussMix2 {
  double w0 = 0.5, mu0 = 0.0, w1 = 0.5, mu1 = 0.0, sigma = 1.0;

  double pdf(double x) const {
    return w0 * normal_pdf(x, mu0, sigma) + w1 * normal_pdf(x, mu1, sigma);
  }
  double cdf(double x) const {
    return w0 * normal_cdf(x, mu0, sigma) + w1 * normal_cdf(x, mu1, sigma);
  }
  double quantile(double p) const {
    double lo = std::min(mu0, mu1) - 12.0 * sigma;
    double hi = std::max(mu0, mu1) + 12.0 * sigma;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  // E[10^(X/10)]: weighted lognormal means.
  double mean_linear_w() const {
    const double c = sigma * std::numbers::ln10 / 10.0;
    const double f = std::exp(0.5 * c * c);
    return w0 * std::pow(10.0, mu0 / 10.0) * f +
           w1 * std::pow(10.0, mu1 / 10.0) * f;
  }
};

// Two-state Markov chain emitting state level plus Gaussian jitter, in dB.
// Both the stationary marginal and the one-step conditionals are known
// two-component mixtures, which makes it a full oracle for the joint /
// conditional density machinery and the quantile predictors.
struct Markov2State {
  double mu0 = -95.0;
  double mu1 = -85.0;
  double sigma = 0.8;
  double p01 = 0.3;  // P(next=1 | current=0)
  double p10 = 0.2;  // P(next=0 | current=1)

  double stationary1() const { return p01 / (p01 + p10); }

  std::vector<double> generate(std::size_t n, ipred::Rng& rng) const {
    std::vector<double> out;
    out.reserve(n);
    int s = rng.uniform() < stationary1() ? 1 : 0;
    for (std::size_t t = 0; t < n; ++t) {
      out.push_back((s == 0 ? mu0 : mu1) + sigma * rng.normal());
      const double flip = s == 0 ? p01 : p10;
      if (rng.uniform() < flip) s = 1 - s;
    }
    return out;
  }

  // Distribution of the next value given the current *value* v: posterior
  // state weights times the transition rows.
  GaussMix2 conditional_next(double v) const {
    const double pi1 = stationary1();
    const double l0 = (1.0 - pi1) * normal_pdf(v, mu0, sigma);
    const double l1 = pi1 * normal_pdf(v, mu1, sigma);
    const double post1 = l1 / (l0 + l1);
    const double w1 = (1.0 - post1) * p01 + post1 * (1.0 - p10);
    return {1.0 - w1, mu0, w1, mu1, sigma};
  }

  GaussMix2 marginal() const {
    const double pi1 = stationary1();
    return {1.0 - pi1, mu0, pi1, mu1, sigma};
  }
};

inline double trapezoid(const std::vector<double>& y, double step) {
  double acc = 0.0;
  for (std::size_t i = 1; i < y.size(); ++i)
    acc += 0.5 * (y[i - 1] + y[i]);
  return acc * step;
}

}  // namespace oracle
