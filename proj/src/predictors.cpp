// SPDX-License-Identifier: Apache-2.0

#include "ipred/predictors.hpp"

#include <cmath>
#include <stdexcept>

namespace ipred {

std::string to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::kMqCond: return "mq_cond";
    case PredictorKind::kMqMarg: return "mq_marg";
    case PredictorKind::kMpCond: return "mp_cond";
    case PredictorKind::kMpMarg: return "mp_marg";
    case PredictorKind::kLpp: return "lpp";
  }
  throw std::invalid_argument("unknown predictor kind");
}

PredictorKind predictor_from_string(const std::string& name) {
  if (name == "mq_cond") return PredictorKind::kMqCond;
  if (name == "mq_marg") return PredictorKind::kMqMarg;
  if (name == "mp_cond") return PredictorKind::kMpCond;
  if (name == "mp_marg") return PredictorKind::kMpMarg;
  if (name == "lpp") return PredictorKind::kLpp;
  throw std::invalid_argument("unknown predictor '" + name + "'");
}

LppState lpp_init(double alpha) {
  if (!(alpha > 0.0) || !(alpha <= 1.0))
    throw std::invalid_argument("lpp: alpha must lie in (0, 1]");
  LppState s;
  s.alpha = alpha;
  return s;
}

double lpp_step(LppState& state, double observed_ipv_w) {
  if (!state.initialised) {
    state.predicted_w = observed_ipv_w;
    state.initialised = true;
  } else {
    state.predicted_w = state.alpha * observed_ipv_w +
                        (1.0 - state.alpha) * state.predicted_w;
  }
  // Keep the prediction strictly positive even for an all-zero series.
  state.predicted_w = std::max(state.predicted_w, kWattsFloor);
  return state.predicted_w;
}

namespace {

void check_observation(double observed_ipv_w) {
  if (!(observed_ipv_w >= 0.0) || !std::isfinite(observed_ipv_w))
    throw std::invalid_argument(
        "predictor: observation must be finite and non-negative");
}

class MqCond final : public Predictor {
 public:
  MqCond(std::shared_ptr<const DensityModel> model, double gamma0)
      : model_(std::move(model)), p_(1.0 - gamma0) {}
  double predict_next_w(double observed_ipv_w) override {
    check_observation(observed_ipv_w);
    return db_to_watts(
        model_->conditional_quantile(watts_to_db(observed_ipv_w), p_));
  }
  std::string name() const override { return "mq_cond"; }

 private:
  std::shared_ptr<const DensityModel> model_;
  double p_;
};

class MqMarg final : public Predictor {
 public:
  MqMarg(std::shared_ptr<const DensityModel> model, double gamma0)
      : model_(std::move(model)), p_(1.0 - gamma0) {}
  double predict_next_w(double observed_ipv_w) override {
    check_observation(observed_ipv_w);
    return db_to_watts(model_->marginal_quantile(p_));
  }
  std::string name() const override { return "mq_marg"; }

 private:
  std::shared_ptr<const DensityModel> model_;
  double p_;
};

class MpCond final : public Predictor {
 public:
  explicit MpCond(std::shared_ptr<const DensityModel> model)
      : model_(std::move(model)) {}
  double predict_next_w(double observed_ipv_w) override {
    check_observation(observed_ipv_w);
    return model_->conditional_mean_w(watts_to_db(observed_ipv_w));
  }
  std::string name() const override { return "mp_cond"; }

 private:
  std::shared_ptr<const DensityModel> model_;
};

class MpMarg final : public Predictor {
 public:
  explicit MpMarg(std::shared_ptr<const DensityModel> model)
      : model_(std::move(model)) {}
  double predict_next_w(double observed_ipv_w) override {
    check_observation(observed_ipv_w);
    return model_->marginal_mean_w();
  }
  std::string name() const override { return "mp_marg"; }

 private:
  std::shared_ptr<const DensityModel> model_;
};

class Lpp final : public Predictor {
 public:
  explicit Lpp(double alpha) : state_(lpp_init(alpha)) {}
  double predict_next_w(double observed_ipv_w) override {
    check_observation(observed_ipv_w);
    return lpp_step(state_, observed_ipv_w);
  }
  void reset() override { state_ = lpp_init(state_.alpha); }
  std::string name() const override { return "lpp"; }

 private:
  LppState state_;
};

}  // namespace

std::unique_ptr<Predictor> make_predictor(
    const PredictorSpec& spec, std::shared_ptr<const DensityModel> model) {
  switch (spec.kind) {
    case PredictorKind::kMqCond:
    case PredictorKind::kMqMarg:
      if (!(spec.gamma0 > 0.0) || !(spec.gamma0 < 1.0))
        throw std::invalid_argument("predictor: gamma0 must lie in (0, 1)");
      if (!model)
        throw std::invalid_argument("predictor: density model required");
      if (spec.kind == PredictorKind::kMqCond)
        return std::make_unique<MqCond>(std::move(model), spec.gamma0);
      return std::make_unique<MqMarg>(std::move(model), spec.gamma0);
    case PredictorKind::kMpCond:
    case PredictorKind::kMpMarg:
      if (!model)
        throw std::invalid_argument("predictor: density model required");
      if (spec.kind == PredictorKind::kMpCond)
        return std::make_unique<MpCond>(std::move(model));
      return std::make_unique<MpMarg>(std::move(model));
    case PredictorKind::kLpp:
      return std::make_unique<Lpp>(spec.alpha);
  }
  throw std::invalid_argument("unknown predictor kind");
}

}  // namespace ipred
