#include "metacog/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "metacog/errors.hpp"

namespace metacog {

namespace {

constexpr double kDt = 0.05;

// pointmass1d: double integrator regulated toward the origin.
constexpr double kPmTarget = 0.0;
constexpr double kPmPosLimit = 2.0;
constexpr double kPmVelLimit = 2.0;

// pendulum: classic swing-up constants.
constexpr double kPendGravity = 10.0;
constexpr double kPendMass = 1.0;
constexpr double kPendLength = 1.0;
constexpr double kPendMaxSpeed = 8.0;

// collapse_valley: narrow high-reward ridge next to a terminal penalty cliff,
// with a capped base cost and a far-left runaway penalty so that only a
// genuinely collapsed policy scores below the failure threshold.
constexpr double kValleyRidgeCenter = 0.8;
constexpr double kValleyRidgeGain = 2.0;
constexpr double kValleyRidgeWidth = 0.05;
constexpr double kValleyCliffEdge = 0.9;
constexpr double kValleyCliffReward = -50.0;
constexpr double kValleyBaseCostCap = 1.6;
constexpr double kValleyFarWall = -2.5;
constexpr double kValleyFarGain = 8.0;

double wrap_angle(double theta) {
  theta = std::fmod(theta + std::numbers::pi, 2.0 * std::numbers::pi);
  if (theta < 0.0) {
    theta += 2.0 * std::numbers::pi;
  }
  return theta - std::numbers::pi;
}

Eigen::VectorXd scalar_vec(double v) {
  Eigen::VectorXd x(1);
  x(0) = v;
  return x;
}

}  // namespace

EnvSpec env_spec(const std::string& name) {
  EnvSpec spec;
  spec.name = name;
  if (name == "pointmass1d") {
    spec.state_dim = 2;
    spec.action_dim = 1;
    spec.action_low = scalar_vec(-1.0);
    spec.action_high = scalar_vec(1.0);
    spec.horizon = 100;
    spec.failure_threshold = -100.0;
    spec.obs_scale = Eigen::VectorXd::Constant(2, 0.5);
  } else if (name == "pendulum") {
    spec.state_dim = 3;
    spec.action_dim = 1;
    spec.action_low = scalar_vec(-2.0);
    spec.action_high = scalar_vec(2.0);
    spec.horizon = 100;
    spec.failure_threshold = -1000.0;
    spec.obs_scale = Eigen::VectorXd::Ones(3);
    spec.obs_scale(2) = 1.0 / kPendMaxSpeed;
  } else if (name == "collapse_valley") {
    spec.state_dim = 1;
    spec.action_dim = 1;
    spec.action_low = scalar_vec(-1.0);
    spec.action_high = scalar_vec(1.0);
    spec.horizon = 300;
    spec.failure_threshold = -500.0;
    spec.obs_scale = Eigen::VectorXd::Ones(1);
  } else {
    throw ConfigError("unknown environment '" + name + "'");
  }
  return spec;
}

Eigen::VectorXd env_reset(const EnvSpec& spec, Rng& rng) {
  if (spec.name == "pointmass1d") {
    Eigen::VectorXd s(2);
    s(0) = rng.uniform(-1.0, 1.0);
    s(1) = 0.0;
    return s;
  }
  if (spec.name == "pendulum") {
    const double theta = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const double omega = rng.uniform(-1.0, 1.0);
    Eigen::VectorXd s(3);
    s(0) = std::cos(theta);
    s(1) = std::sin(theta);
    s(2) = omega;
    return s;
  }
  if (spec.name == "collapse_valley") {
    return Eigen::VectorXd::Zero(1);
  }
  throw ConfigError("unknown environment '" + spec.name + "'");
}

EnvStep env_step(const EnvSpec& spec, const Eigen::VectorXd& state,
                 const Eigen::VectorXd& action) {
  EnvStep out;
  const double a = std::clamp(action(0), spec.action_low(0), spec.action_high(0));

  if (spec.name == "pointmass1d") {
    const double vel = std::clamp(state(1) + kDt * a, -kPmVelLimit, kPmVelLimit);
    const double pos = std::clamp(state(0) + kDt * vel, -kPmPosLimit, kPmPosLimit);
    out.state = Eigen::VectorXd(2);
    out.state << pos, vel;
    out.reward = -std::abs(pos - kPmTarget) - 0.01 * a * a;
    out.done = false;
    return out;
  }

  if (spec.name == "pendulum") {
    const double theta = std::atan2(state(1), state(0));
    double omega = state(2);
    omega += (3.0 * kPendGravity / (2.0 * kPendLength) * std::sin(theta) +
              3.0 / (kPendMass * kPendLength * kPendLength) * a) *
             kDt;
    omega = std::clamp(omega, -kPendMaxSpeed, kPendMaxSpeed);
    const double next_theta = theta + omega * kDt;
    const double wrapped = wrap_angle(next_theta);
    out.state = Eigen::VectorXd(3);
    out.state << std::cos(next_theta), std::sin(next_theta), omega;
    out.reward = -(wrapped * wrapped + 0.1 * omega * omega + 0.001 * a * a);
    out.done = false;
    return out;
  }

  if (spec.name == "collapse_valley") {
    const double pos = state(0) + kDt * a;
    out.state = scalar_vec(pos);
    if (state(0) > kValleyCliffEdge || pos > kValleyCliffEdge) {
      out.reward = kValleyCliffReward;
      out.done = true;
      return out;
    }
    const double dist = std::abs(pos - kValleyRidgeCenter);
    const double z = (pos - kValleyRidgeCenter) / kValleyRidgeWidth;
    double reward = -std::min(dist, kValleyBaseCostCap) +
                    kValleyRidgeGain * std::exp(-z * z);
    if (pos < kValleyFarWall) {
      reward -= kValleyFarGain * (kValleyFarWall - pos);
    }
    out.reward = reward;
    out.done = false;
    return out;
  }

  throw ConfigError("unknown environment '" + spec.name + "'");
}

void validate_corruption(const CorruptionScheme& scheme) {
  if (scheme.xi < 0.0) {
    throw ConfigError("corruption.xi must be >= 0");
  }
  auto in01 = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in01(scheme.p_start) || !in01(scheme.p_end)) {
    throw ConfigError("corruption probabilities must lie in [0, 1]");
  }
  if (scheme.mode == CorruptionMode::stationary && scheme.p_start != scheme.p_end) {
    throw ConfigError("stationary corruption requires p_start == p_end");
  }
  if (scheme.total_steps <= 0) {
    throw ConfigError("corruption.total_steps must be positive");
  }
}

double corruption_probability(const CorruptionScheme& scheme, long t) {
  switch (scheme.mode) {
    case CorruptionMode::none:
      return 0.0;
    case CorruptionMode::stationary:
      return scheme.p_start;
    case CorruptionMode::linear: {
      const double frac = std::min(static_cast<double>(t) /
                                       static_cast<double>(scheme.total_steps),
                                   1.0);
      return scheme.p_start + (scheme.p_end - scheme.p_start) * frac;
    }
  }
  return 0.0;
}

double corrupt_reward(double reward, const CorruptionScheme& scheme, long t, Rng& rng,
                      double* offset_out) {
  if (offset_out != nullptr) {
    *offset_out = 0.0;
  }
  if (scheme.mode == CorruptionMode::none) {
    return reward;
  }
  const double p = corruption_probability(scheme, t);
  if (rng.uniform01() < p) {
    const double eps = rng.uniform(-scheme.xi, scheme.xi);
    if (offset_out != nullptr) {
      *offset_out = eps;
    }
    return reward + eps;
  }
  return reward;
}

}  // namespace metacog
