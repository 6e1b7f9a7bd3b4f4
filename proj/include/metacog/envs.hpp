#pragma once

#include <Eigen/Core>

#include <string>

#include "metacog/rng.hpp"

namespace metacog {

struct EnvSpec {
  std::string name;
  int state_dim = 1;
  int action_dim = 1;
  Eigen::VectorXd action_low;
  Eigen::VectorXd action_high;
  int horizon = 100;
  // Per-episode return below which a run's final phase counts as
  // irrecoverably poor (see metrics).
  double failure_threshold = 0.0;
  // Fixed per-environment affine observation scaling, applied only when the
  // learner's normalize_obs flag is on.
  Eigen::VectorXd obs_scale;
};

// Built-in environments: pointmass1d, pendulum, collapse_valley.
// Throws ConfigError for unknown names.
EnvSpec env_spec(const std::string& name);

struct EnvStep {
  Eigen::VectorXd state;
  double reward = 0.0;
  bool done = false;  // environment-specific termination only
};

// Pure dynamics: deterministic given (state, action). Actions are clamped to
// the EnvSpec bounds before integration. Horizon truncation is handled by the
// Environment wrapper, not here.
EnvStep env_step(const EnvSpec& spec, const Eigen::VectorXd& state,
                 const Eigen::VectorXd& action);

// Initial-state draw for the environment.
Eigen::VectorXd env_reset(const EnvSpec& spec, Rng& rng);

// Stateful wrapper used by rollouts: tracks the episode step count and
// reports done when either the dynamics terminate or the horizon is reached.
class Environment {
 public:
  explicit Environment(EnvSpec spec) : spec_(std::move(spec)) {}

  const EnvSpec& spec() const { return spec_; }
  const Eigen::VectorXd& state() const { return state_; }
  int episode_step() const { return episode_step_; }

  const Eigen::VectorXd& reset(Rng& rng) {
    state_ = env_reset(spec_, rng);
    episode_step_ = 0;
    return state_;
  }

  EnvStep step(const Eigen::VectorXd& action) {
    EnvStep s = env_step(spec_, state_, action);
    ++episode_step_;
    if (episode_step_ >= spec_.horizon) {
      s.done = true;
    }
    state_ = s.state;
    return s;
  }

 private:
  EnvSpec spec_;
  Eigen::VectorXd state_;
  int episode_step_ = 0;
};

enum class CorruptionMode { none, stationary, linear };

// Reward-corruption parameters: with probability p(t) the training reward is
// replaced by reward + eps, eps ~ U(-xi, xi). The linear mode ramps p from
// p_start to p_end over total_steps environment steps.
struct CorruptionScheme {
  CorruptionMode mode = CorruptionMode::none;
  double p_start = 0.0;
  double p_end = 0.0;
  double xi = 0.0;
  long total_steps = 1;

  static CorruptionScheme off() { return {}; }
  static CorruptionScheme stationary(double p, double xi) {
    return {CorruptionMode::stationary, p, p, xi, 1};
  }
  static CorruptionScheme linear(double p_start, double p_end, double xi,
                                 long total_steps) {
    return {CorruptionMode::linear, p_start, p_end, xi, total_steps};
  }
};

// Throws ConfigError if the scheme violates its invariants.
void validate_corruption(const CorruptionScheme& scheme);

double corruption_probability(const CorruptionScheme& scheme, long t);

// Consumes exactly one Bernoulli draw, plus one uniform draw only when the
// step is corrupted; the fixed draw order keeps corruption streams pairable
// across controller variants. When offset_out is given it receives the drawn
// noise (0 for uncorrupted steps), which is bit-identical across paired runs.
double corrupt_reward(double reward, const CorruptionScheme& scheme, long t, Rng& rng,
                      double* offset_out = nullptr);

}  // namespace metacog
