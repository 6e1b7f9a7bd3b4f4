#pragma once

#include <Eigen/Core>

#include "metacog/rng.hpp"

namespace metacog {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

struct NetConfig {
  int state_dim = 1;
  int action_dim = 1;
  int hidden = 32;  // two hidden layers of this width, tanh activations
};

// Shared-trunk two-headed network: tanh trunk, linear Gaussian-mean head and
// linear value head, plus a state-independent log-std vector. Heads are
// zero-initialized so a fresh policy acts symmetrically around zero.
struct PolicyValueParams {
  Eigen::MatrixXd w1;  // hidden x state_dim
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // hidden x hidden
  Eigen::VectorXd b2;
  Eigen::MatrixXd w_mean;  // action_dim x hidden
  Eigen::VectorXd b_mean;
  Eigen::RowVectorXd w_value;  // 1 x hidden
  double b_value = 0.0;
  Eigen::VectorXd log_std;  // action_dim, clamped to [kLogStdMin, kLogStdMax]

  int state_dim() const { return static_cast<int>(w1.cols()); }
  int action_dim() const { return static_cast<int>(w_mean.rows()); }
  int hidden_dim() const { return static_cast<int>(w1.rows()); }
};

PolicyValueParams init_params(const NetConfig& cfg, Rng& rng);

std::size_t param_count(const PolicyValueParams& p);
Eigen::VectorXd flatten(const PolicyValueParams& p);
void unflatten(const Eigen::VectorXd& flat, PolicyValueParams& p);

struct PolicyValueOutput {
  Eigen::VectorXd mean;
  Eigen::VectorXd log_std;
  double value = 0.0;
};

// Single-state forward pass. Throws ConfigError on dimension mismatch.
PolicyValueOutput forward_policy_value(const PolicyValueParams& p,
                                       const Eigen::VectorXd& state);

// Batched forward pass over row-major batches (one sample per row); keeps the
// activations needed by the backward pass.
struct BatchForward {
  Eigen::MatrixXd h1;    // B x hidden
  Eigen::MatrixXd h2;    // B x hidden
  Eigen::MatrixXd mean;  // B x action_dim
  Eigen::VectorXd value; // B
};

BatchForward batch_forward(const PolicyValueParams& p, const Eigen::MatrixXd& states);

// Diagonal-Gaussian log density of `action` under (mean, log_std).
double gaussian_log_prob(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                         const Eigen::VectorXd& action);

// Entropy of the diagonal Gaussian; depends on log_std only.
double gaussian_entropy(const Eigen::VectorXd& log_std);

}  // namespace metacog
