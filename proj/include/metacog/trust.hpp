#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "metacog/errors.hpp"
#include "metacog/signals.hpp"

namespace metacog {

// Meta-trust state: a scalar confidence in the learning process together
// with its asymmetric update rates and the fail-safe parameters.
struct TrustState {
  double tau = 0.5;
  double eta_up = 0.02;    // recovery rate per iteration
  double eta_down = 0.05;  // decay rate per iteration
  double tau_min = 0.6;    // fail-safe threshold
  double c_max = 2.0;      // maximum learning-rate scale
};

// Per-iteration controller record; the unit of logging and replay.
// effective_lr == base_lr * scale exactly.
struct ControllerOutput {
  int iteration = 0;
  double vpes = 0.0;
  double baseline = 0.0;
  double trend = 0.0;
  double tau = 0.0;
  double scale = 0.0;
  double effective_lr = 0.0;
};

// Asymmetric update: trust climbs slowly while stability improves and drops
// quickly otherwise. A trend of exactly zero counts as deteriorating.
inline TrustState update_trust(TrustState state, double trend) {
  if (trend > 0.0) {
    state.tau = std::min(1.0, state.tau + state.eta_up);
  } else {
    state.tau = std::max(0.0, state.tau - state.eta_down);
  }
  return state;
}

// Learning-rate scale f(tau) = c_max * tau, with the fail-safe clip: while
// trust is below tau_min the scale may reduce updates but never amplify them.
inline double learning_scale(const TrustState& state) {
  double c = state.c_max * state.tau;
  if (state.tau < state.tau_min) {
    c = std::min(c, 1.0);
  }
  return c;
}

struct ControllerConfig {
  double tau0 = 0.5;
  double eta_up = 0.02;
  double eta_down = 0.05;
  double tau_min = 0.6;
  double c_max = 2.0;
  double beta_v = 0.1;           // EMA smoothing for the VPES baseline
  std::size_t window_capacity = 64;  // TD-error window length
};

// Throws ConfigError on invalid values; returns human-readable warnings for
// configurations that are legal but defeat parts of the mechanism.
inline std::vector<std::string> validate_controller_config(const ControllerConfig& cfg) {
  if (!(cfg.tau0 > 0.0 && cfg.tau0 < 1.0)) {
    throw ConfigError("controller.tau0 must lie in the open interval (0, 1)");
  }
  if (cfg.eta_up < 0.0 || cfg.eta_down < 0.0) {
    throw ConfigError("controller eta rates must be >= 0");
  }
  if (!(cfg.tau_min >= 0.0 && cfg.tau_min <= 1.0)) {
    throw ConfigError("controller.tau_min must lie in [0, 1]");
  }
  if (!(cfg.c_max > 0.0)) {
    throw ConfigError("controller.c_max must be > 0");
  }
  if (!(cfg.beta_v >= 0.0 && cfg.beta_v <= 1.0)) {
    throw ConfigError("controller.beta_v must lie in [0, 1]");
  }
  if (cfg.window_capacity == 0) {
    throw ConfigError("controller.window must be a positive integer");
  }
  std::vector<std::string> warnings;
  if (!(cfg.c_max * cfg.tau_min > 1.0)) {
    warnings.push_back("fail-safe clip can never bind (c_max * tau_min <= 1)");
  }
  return warnings;
}

inline std::pair<TrustState, VpesState> reset_controller(const ControllerConfig& cfg) {
  validate_controller_config(cfg);
  TrustState trust{cfg.tau0, cfg.eta_up, cfg.eta_down, cfg.tau_min, cfg.c_max};
  VpesState vpes_state{0.0, cfg.beta_v, false};
  return {trust, vpes_state};
}

struct ControllerStep {
  TrustState trust;
  VpesState vpes_state;
  ControllerOutput output;
};

// One full controller decision, in the loop's literal order: baseline update,
// trend, trust update, scale with fail-safe, effective learning rate. The
// current VPES therefore contributes to both the baseline and the trend.
inline ControllerStep step_controller(TrustState trust, VpesState vpes_state,
                                      double vpes, double base_lr, int iteration) {
  vpes_state = update_baseline(vpes_state, vpes);
  const double trend = stability_trend(vpes_state, vpes);
  trust = update_trust(trust, trend);
  const double scale = learning_scale(trust);
  ControllerOutput out;
  out.iteration = iteration;
  out.vpes = vpes;
  out.baseline = vpes_state.baseline;
  out.trend = trend;
  out.tau = trust.tau;
  out.scale = scale;
  out.effective_lr = base_lr * scale;
  return {trust, vpes_state, out};
}

}  // namespace metacog
