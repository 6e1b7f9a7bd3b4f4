#pragma once

#include <Eigen/Core>

#include <deque>
#include <string>
#include <vector>

#include "metacog/envs.hpp"
#include "metacog/policy.hpp"
#include "metacog/rng.hpp"

namespace metacog {

// One rollout of fixed length; episodes auto-reset on done. Learning sees the
// corrupted rewards, evaluation elsewhere uses clean ones. TD errors are
// delta_i = r_corrupt_i + gamma * V(s_{i+1}) * (1 - done_i) - V(s_i).
struct Trajectory {
  Eigen::MatrixXd states;   // n x state_dim
  Eigen::MatrixXd actions;  // n x action_dim
  Eigen::VectorXd rewards_clean;
  Eigen::VectorXd rewards_corrupt;
  Eigen::VectorXd done;    // 1.0 when the step ended an episode
  Eigen::VectorXd values;  // V(s_i) under the rollout policy
  double bootstrap_value = 0.0;  // V of the state after the last step
  Eigen::VectorXd log_probs;

  // Filled by compute_gae.
  Eigen::VectorXd td_errors;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;

  // Clean returns of episodes completed within this rollout.
  std::vector<double> episode_returns;

  // Raw corruption noise per step (0 where uncorrupted); bit-identical across
  // paired runs that share a corruption stream.
  Eigen::VectorXd corruption_offsets;

  Eigen::Index size() const { return rewards_clean.size(); }
};

struct RolloutResult {
  Trajectory trajectory;
  bool diverged = false;
  std::string diagnostic;
};

// Rollout state that persists across iterations of one run: the global
// environment-step counter (drives the corruption schedule) and the clean
// return of the episode currently in progress.
struct RolloutContext {
  long global_step = 0;
  double episode_return = 0.0;
  bool needs_reset = true;
};

// Collects exactly n_steps transitions, sampling actions from the Gaussian
// policy. Corruption draws come from the dedicated corruption stream, one
// decision per transition. A non-finite state or action marks the rollout
// diverged instead of throwing.
RolloutResult collect_rollout(Environment& env, const PolicyValueParams& params,
                              int n_steps, const CorruptionScheme& corruption,
                              Rng& action_rng, Rng& corruption_rng,
                              RolloutContext& ctx, bool normalize_obs = false);

// Fills td_errors, advantages (GAE) and returns = advantages + values.
// With lambda = 0 the advantages equal the TD errors exactly.
void compute_gae(Trajectory& traj, double gamma, double lambda);

// Nonnegative per-sample weights, mean-normalized to one; samples whose TD
// error deviates more from the batch mean get smaller weights:
// raw_i = sigma_ref / (sigma_ref + |delta_i - mean(delta)|).
struct SampleWeights {
  Eigen::VectorXd w;
};

SampleWeights td_variance_weights(const Eigen::VectorXd& deltas, double sigma_ref);

struct PpoOptions {
  double clip_eps = 0.2;
  int epochs = 4;
  int minibatch = 64;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double value_clip_eps = 0.0;  // 0 disables value clipping
};

// A ready-to-differentiate batch: advantages are expected to be normalized
// already, weights mean-normalized.
struct PpoBatch {
  Eigen::MatrixXd states;
  Eigen::MatrixXd actions;
  Eigen::VectorXd advantages;
  Eigen::VectorXd log_probs_old;
  Eigen::VectorXd returns;
  Eigen::VectorXd values_old;
  Eigen::VectorXd weights;
};

// Weighted PPO-clip surrogate + value_coef * squared value error
// - entropy_coef * entropy, averaged over the batch.
double ppo_loss(const PolicyValueParams& params, const PpoBatch& batch,
                const PpoOptions& opts);

// Loss plus its analytic gradient in flatten() order.
std::pair<double, Eigen::VectorXd> ppo_loss_grad(const PolicyValueParams& params,
                                                 const PpoBatch& batch,
                                                 const PpoOptions& opts);

struct GradStats {
  double loss = 0.0;       // full-batch loss before any update
  double grad_norm = 0.0;  // global norm of the full-batch gradient
  double norm_variance = 0.0;  // population variance over the recent norms
  int skipped_updates = 0;     // minibatch steps skipped due to non-finite loss
};

// Plain-SGD PPO update with per-sample weights. Advantages are mean/std
// normalized over the full batch (std floor 1e-8) before the surrogate.
// With effective_lr == 0 the parameters are left bit-identical. norm_history
// keeps the last 10 full-batch gradient norms across calls.
GradStats ppo_update(PolicyValueParams& params, const Trajectory& traj,
                     const SampleWeights& weights, double effective_lr,
                     const PpoOptions& opts, Rng& shuffle_rng,
                     std::deque<double>& norm_history);

}  // namespace metacog
