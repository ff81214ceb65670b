// SPDX-License-Identifier: Apache-2.0
//
// One-step-ahead interference predictors.  Quantile predictors (MQ) aim a
// target exceedance rate gamma0 by predicting the (1 - gamma0) quantile of
// the next value's distribution; mean predictors (MP) predict its linear
// expectation; the low-pass predictor (LPP) exponentially smooths the
// observed series.  "cond" variants condition the distribution on the
// latest observation via the fitted joint density, "marg" variants use the
// marginal distribution, making the prediction constant.

#pragma once

#include <memory>
#include <string>

#include "ipred/density.hpp"

namespace ipred {

enum class PredictorKind { kMqCond, kMqMarg, kMpCond, kMpMarg, kLpp };

std::string to_string(PredictorKind kind);
PredictorKind predictor_from_string(const std::string& name);

struct PredictorSpec {
  PredictorKind kind = PredictorKind::kMqCond;
  double gamma0 = 0.0;  // target exceedance rate, MQ kinds only, in (0, 1)
  double alpha = 0.0;   // smoothing factor, LPP only, in (0, 1]
};

// Exponential smoothing state.  The first observation becomes the first
// prediction; afterwards predicted = alpha * observed + (1-alpha) * previous
// prediction.
struct LppState {
  double alpha = 0.0;
  double predicted_w = 0.0;
  bool initialised = false;
};

LppState lpp_init(double alpha);  // throws unless 0 < alpha <= 1
double lpp_step(LppState& state, double observed_ipv_w);

class Predictor {
 public:
  virtual ~Predictor() = default;

  // Predicted interference power for the next TTI given this TTI's
  // observation, in watts (always strictly positive and finite).  Called
  // once per transition, in time order.
  virtual double predict_next_w(double observed_ipv_w) = 0;

  // Clears any internal state so the predictor can replay another series.
  virtual void reset() {}

  virtual std::string name() const = 0;
};

// Builds a predictor from a spec.  Density-based kinds require a fitted
// model; LPP ignores it (may be null).  Throws std::invalid_argument on a
// missing model or out-of-range spec parameters.
std::unique_ptr<Predictor> make_predictor(
    const PredictorSpec& spec, std::shared_ptr<const DensityModel> model);

}  // namespace ipred
