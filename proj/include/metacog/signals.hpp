#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "metacog/errors.hpp"

namespace metacog {

// Sliding window of recent TD errors, most recent last. The training loop
// resets the window each iteration and fills it with the rollout's TD errors;
// when the rollout is longer than the capacity only the most recent
// `capacity` errors remain.
struct TdWindow {
  std::size_t capacity = 64;
  std::vector<double> values;
};

inline TdWindow push_td_error(TdWindow window, double delta) {
  if (!std::isfinite(delta)) {
    throw DataError("push_td_error: non-finite TD error (corrupted learner state)");
  }
  window.values.push_back(delta);
  while (window.values.size() > window.capacity) {
    window.values.erase(window.values.begin());
  }
  return window;
}

// Instability signal: population variance of the TD errors in the window.
// Population (divide by n) so that a single-element window is defined and a
// constant window is exactly zero.
inline double compute_vpes(const TdWindow& window) {
  if (window.values.empty()) {
    throw std::invalid_argument("compute_vpes: window is empty");
  }
  Eigen::Map<const Eigen::ArrayXd> x(window.values.data(),
                                     static_cast<Eigen::Index>(window.values.size()));
  const double mean = x.mean();
  return (x - mean).square().mean();
}

// Exponential moving average of the instability signal. `baseline` starts at
// zero, which makes the first trend read as deteriorating whenever the first
// signal is positive and smoothing < 1.
struct VpesState {
  double baseline = 0.0;
  double smoothing = 0.1;  // immutable over a run
  bool initialized = false;
};

inline VpesState update_baseline(VpesState state, double vpes) {
  if (!std::isfinite(vpes) || vpes < 0.0) {
    throw std::invalid_argument("update_baseline: vpes must be finite and >= 0");
  }
  state.baseline = (1.0 - state.smoothing) * state.baseline + state.smoothing * vpes;
  state.initialized = true;
  return state;
}

// Positive: stability improving. Negative or zero: deteriorating (zero is
// deliberately routed to the deteriorating branch downstream).
inline double stability_trend(const VpesState& state, double vpes) {
  return state.baseline - vpes;
}

}  // namespace metacog
