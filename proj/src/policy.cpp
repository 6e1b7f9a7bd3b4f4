#include "metacog/policy.hpp"

#include <cmath>
#include <numbers>

#include "metacog/errors.hpp"

namespace metacog {

namespace {

Eigen::MatrixXd xavier_uniform(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Eigen::MatrixXd w(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      w(r, c) = rng.uniform(-limit, limit);
    }
  }
  return w;
}

}  // namespace

PolicyValueParams init_params(const NetConfig& cfg, Rng& rng) {
  PolicyValueParams p;
  p.w1 = xavier_uniform(cfg.hidden, cfg.state_dim, rng);
  p.b1 = Eigen::VectorXd::Zero(cfg.hidden);
  p.w2 = xavier_uniform(cfg.hidden, cfg.hidden, rng);
  p.b2 = Eigen::VectorXd::Zero(cfg.hidden);
  p.w_mean = Eigen::MatrixXd::Zero(cfg.action_dim, cfg.hidden);
  p.b_mean = Eigen::VectorXd::Zero(cfg.action_dim);
  p.w_value = Eigen::RowVectorXd::Zero(cfg.hidden);
  p.b_value = 0.0;
  p.log_std = Eigen::VectorXd::Zero(cfg.action_dim);
  return p;
}

std::size_t param_count(const PolicyValueParams& p) {
  return static_cast<std::size_t>(p.w1.size() + p.b1.size() + p.w2.size() + p.b2.size() +
                                  p.w_mean.size() + p.b_mean.size() + p.w_value.size() +
                                  1 + p.log_std.size());
}

Eigen::VectorXd flatten(const PolicyValueParams& p) {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(param_count(p)));
  Eigen::Index k = 0;
  auto put = [&](const auto& m) {
    flat.segment(k, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    k += m.size();
  };
  put(p.w1);
  put(p.b1);
  put(p.w2);
  put(p.b2);
  put(p.w_mean);
  put(p.b_mean);
  put(p.w_value);
  flat(k++) = p.b_value;
  put(p.log_std);
  return flat;
}

void unflatten(const Eigen::VectorXd& flat, PolicyValueParams& p) {
  Eigen::Index k = 0;
  auto take = [&](auto& m) {
    Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = flat.segment(k, m.size());
    k += m.size();
  };
  take(p.w1);
  take(p.b1);
  take(p.w2);
  take(p.b2);
  take(p.w_mean);
  take(p.b_mean);
  take(p.w_value);
  p.b_value = flat(k++);
  take(p.log_std);
}

PolicyValueOutput forward_policy_value(const PolicyValueParams& p,
                                       const Eigen::VectorXd& state) {
  if (state.size() != p.state_dim()) {
    throw ConfigError("forward_policy_value: state dimension mismatch");
  }
  const Eigen::VectorXd h1 = (p.w1 * state + p.b1).array().tanh();
  const Eigen::VectorXd h2 = (p.w2 * h1 + p.b2).array().tanh();
  PolicyValueOutput out;
  out.mean = p.w_mean * h2 + p.b_mean;
  out.log_std = p.log_std;
  out.value = p.w_value * h2 + p.b_value;
  return out;
}

BatchForward batch_forward(const PolicyValueParams& p, const Eigen::MatrixXd& states) {
  if (states.cols() != p.state_dim()) {
    throw ConfigError("batch_forward: state dimension mismatch");
  }
  BatchForward f;
  f.h1 = ((states * p.w1.transpose()).rowwise() + p.b1.transpose()).array().tanh();
  f.h2 = ((f.h1 * p.w2.transpose()).rowwise() + p.b2.transpose()).array().tanh();
  f.mean = (f.h2 * p.w_mean.transpose()).rowwise() + p.b_mean.transpose();
  f.value = (f.h2 * p.w_value.transpose()).array() + p.b_value;
  return f;
}

double gaussian_log_prob(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                         const Eigen::VectorXd& action) {
  const Eigen::ArrayXd z = (action - mean).array() * (-log_std).array().exp();
  return -0.5 * z.square().sum() - log_std.sum() -
         0.5 * static_cast<double>(mean.size()) * std::log(2.0 * std::numbers::pi);
}

double gaussian_entropy(const Eigen::VectorXd& log_std) {
  return log_std.sum() + 0.5 * static_cast<double>(log_std.size()) *
                             (1.0 + std::log(2.0 * std::numbers::pi));
}

}  // namespace metacog
