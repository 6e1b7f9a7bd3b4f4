#include "metacog/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "metacog/errors.hpp"

namespace metacog {

namespace {

Eigen::VectorXd visible_state(const EnvSpec& spec, const Eigen::VectorXd& state,
                              bool normalize_obs) {
  if (!normalize_obs) {
    return state;
  }
  return state.cwiseProduct(spec.obs_scale);
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

// Gradient accumulator with the same shapes as the parameters.
PolicyValueParams zero_like(const PolicyValueParams& p) {
  PolicyValueParams g;
  g.w1 = Eigen::MatrixXd::Zero(p.w1.rows(), p.w1.cols());
  g.b1 = Eigen::VectorXd::Zero(p.b1.size());
  g.w2 = Eigen::MatrixXd::Zero(p.w2.rows(), p.w2.cols());
  g.b2 = Eigen::VectorXd::Zero(p.b2.size());
  g.w_mean = Eigen::MatrixXd::Zero(p.w_mean.rows(), p.w_mean.cols());
  g.b_mean = Eigen::VectorXd::Zero(p.b_mean.size());
  g.w_value = Eigen::RowVectorXd::Zero(p.w_value.size());
  g.b_value = 0.0;
  g.log_std = Eigen::VectorXd::Zero(p.log_std.size());
  return g;
}

bool grad_finite(const PolicyValueParams& g) {
  return g.w1.allFinite() && g.b1.allFinite() && g.w2.allFinite() && g.b2.allFinite() &&
         g.w_mean.allFinite() && g.b_mean.allFinite() && g.w_value.allFinite() &&
         std::isfinite(g.b_value) && g.log_std.allFinite();
}

void apply_sgd(PolicyValueParams& p, const PolicyValueParams& g, double lr) {
  p.w1 -= lr * g.w1;
  p.b1 -= lr * g.b1;
  p.w2 -= lr * g.w2;
  p.b2 -= lr * g.b2;
  p.w_mean -= lr * g.w_mean;
  p.b_mean -= lr * g.b_mean;
  p.w_value -= lr * g.w_value;
  p.b_value -= lr * g.b_value;
  p.log_std -= lr * g.log_std;
  p.log_std = p.log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

struct LossGrad {
  double loss = 0.0;
  PolicyValueParams grad;
};

LossGrad ppo_loss_grad_impl(const PolicyValueParams& p, const PpoBatch& batch,
                            const PpoOptions& opts) {
  const Eigen::Index n = batch.states.rows();
  const Eigen::Index act = p.action_dim();
  const BatchForward f = batch_forward(p, batch.states);

  const Eigen::ArrayXd inv_var = (-2.0 * p.log_std.array()).exp();  // per action dim
  const Eigen::MatrixXd diff = batch.actions - f.mean;              // n x act

  // log pi(a|s) per sample
  Eigen::VectorXd logp(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    logp(i) = -0.5 * (diff.row(i).transpose().array().square() * inv_var).sum() -
              p.log_std.sum() -
              0.5 * static_cast<double>(act) * std::log(2.0 * std::numbers::pi);
  }

  const Eigen::ArrayXd ratio = (logp - batch.log_probs_old).array().exp();
  const Eigen::ArrayXd adv = batch.advantages.array();
  const Eigen::ArrayXd t_unclipped = ratio * adv;
  const Eigen::ArrayXd t_clipped =
      ratio.min(1.0 + opts.clip_eps).max(1.0 - opts.clip_eps) * adv;
  const Eigen::ArrayXd surrogate = t_unclipped.min(t_clipped);

  const double entropy = gaussian_entropy(p.log_std);

  const Eigen::ArrayXd value_err = f.value.array() - batch.returns.array();
  Eigen::ArrayXd value_loss;
  Eigen::ArrayXd dvalue;  // d(value term)/d v, before weights
  if (opts.value_clip_eps > 0.0) {
    const Eigen::ArrayXd dv = f.value.array() - batch.values_old.array();
    const Eigen::ArrayXd v_clipped =
        batch.values_old.array() + dv.min(opts.value_clip_eps).max(-opts.value_clip_eps);
    const Eigen::ArrayXd err_clipped = v_clipped - batch.returns.array();
    const Eigen::ArrayXd unclipped_sq = value_err.square();
    const Eigen::ArrayXd clipped_sq = err_clipped.square();
    value_loss = unclipped_sq.max(clipped_sq);
    dvalue = Eigen::ArrayXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (unclipped_sq(i) >= clipped_sq(i)) {
        dvalue(i) = 2.0 * value_err(i);
      } else if (std::abs(dv(i)) < opts.value_clip_eps) {
        dvalue(i) = 2.0 * err_clipped(i);
      }
    }
  } else {
    value_loss = value_err.square();
    dvalue = 2.0 * value_err;
  }

  const Eigen::ArrayXd w = batch.weights.array();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double loss =
      inv_n * (w * (-surrogate + opts.value_coef * value_loss - opts.entropy_coef * entropy))
                  .sum();

  // d loss / d logp_i: only the unclipped branch propagates through the ratio.
  Eigen::ArrayXd dlogp(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool unclipped = t_unclipped(i) <= t_clipped(i);
    dlogp(i) = unclipped ? -w(i) * inv_n * adv(i) * ratio(i) : 0.0;
  }

  LossGrad out;
  out.loss = loss;
  out.grad = zero_like(p);

  // Heads.
  Eigen::MatrixXd gmean(n, act);  // d loss / d mean
  for (Eigen::Index j = 0; j < act; ++j) {
    // d logp / d mean_j = diff_ij * inv_var_j; mean enters logp negatively
    // through diff, so the chain is dlogp_i * diff_ij * inv_var_j.
    gmean.col(j) = (dlogp * diff.col(j).array() * inv_var(j)).matrix();
  }
  const Eigen::VectorXd gvalue =
      (w * inv_n * opts.value_coef * dvalue).matrix();

  // log-std: surrogate path plus the entropy bonus.
  for (Eigen::Index j = 0; j < act; ++j) {
    const Eigen::ArrayXd dlogp_dpsi =
        diff.col(j).array().square() * inv_var(j) - 1.0;
    out.grad.log_std(j) =
        (dlogp * dlogp_dpsi).sum() - opts.entropy_coef * inv_n * w.sum();
  }

  out.grad.w_mean = gmean.transpose() * f.h2;
  out.grad.b_mean = gmean.colwise().sum().transpose();
  out.grad.w_value = gvalue.transpose() * f.h2;
  out.grad.b_value = gvalue.sum();

  // Trunk.
  Eigen::MatrixXd gh2 = gmean * p.w_mean + gvalue * p.w_value;
  Eigen::MatrixXd gz2 =
      (gh2.array() * (1.0 - f.h2.array().square())).matrix();
  out.grad.w2 = gz2.transpose() * f.h1;
  out.grad.b2 = gz2.colwise().sum().transpose();

  Eigen::MatrixXd gh1 = gz2 * p.w2;
  Eigen::MatrixXd gz1 =
      (gh1.array() * (1.0 - f.h1.array().square())).matrix();
  out.grad.w1 = gz1.transpose() * batch.states;
  out.grad.b1 = gz1.colwise().sum().transpose();

  return out;
}

PpoBatch gather(const PpoBatch& full, const std::vector<int>& idx, int begin, int end) {
  PpoBatch b;
  const int m = end - begin;
  b.states.resize(m, full.states.cols());
  b.actions.resize(m, full.actions.cols());
  b.advantages.resize(m);
  b.log_probs_old.resize(m);
  b.returns.resize(m);
  b.values_old.resize(m);
  b.weights.resize(m);
  for (int k = 0; k < m; ++k) {
    const int i = idx[static_cast<std::size_t>(begin + k)];
    b.states.row(k) = full.states.row(i);
    b.actions.row(k) = full.actions.row(i);
    b.advantages(k) = full.advantages(i);
    b.log_probs_old(k) = full.log_probs_old(i);
    b.returns(k) = full.returns(i);
    b.values_old(k) = full.values_old(i);
    b.weights(k) = full.weights(i);
  }
  return b;
}

}  // namespace

RolloutResult collect_rollout(Environment& env, const PolicyValueParams& params,
                              int n_steps, const CorruptionScheme& corruption,
                              Rng& action_rng, Rng& corruption_rng,
                              RolloutContext& ctx, bool normalize_obs) {
  RolloutResult result;
  Trajectory& traj = result.trajectory;
  const EnvSpec& spec = env.spec();

  traj.states.resize(n_steps, spec.state_dim);
  traj.actions.resize(n_steps, spec.action_dim);
  traj.rewards_clean.resize(n_steps);
  traj.rewards_corrupt.resize(n_steps);
  traj.done.resize(n_steps);
  traj.values.resize(n_steps);
  traj.log_probs.resize(n_steps);
  traj.corruption_offsets.resize(n_steps);

  if (ctx.needs_reset) {
    env.reset(action_rng);
    ctx.episode_return = 0.0;
    ctx.needs_reset = false;
  }

  for (int i = 0; i < n_steps; ++i) {
    const Eigen::VectorXd obs = visible_state(spec, env.state(), normalize_obs);
    if (!all_finite(obs)) {
      result.diverged = true;
      result.diagnostic = "non-finite environment state at step " +
                          std::to_string(ctx.global_step);
      return result;
    }
    const PolicyValueOutput pv = forward_policy_value(params, obs);
    Eigen::VectorXd action(spec.action_dim);
    for (int j = 0; j < spec.action_dim; ++j) {
      action(j) = pv.mean(j) + std::exp(pv.log_std(j)) * action_rng.normal();
    }
    if (!all_finite(action)) {
      result.diverged = true;
      result.diagnostic = "non-finite action at step " + std::to_string(ctx.global_step);
      return result;
    }
    const double logp = gaussian_log_prob(pv.mean, pv.log_std, action);

    EnvStep step = env.step(action);
    if (!all_finite(step.state) || !std::isfinite(step.reward)) {
      result.diverged = true;
      result.diagnostic = "non-finite state propagation at step " +
                          std::to_string(ctx.global_step);
      return result;
    }

    double offset = 0.0;
    const double corrupted =
        corrupt_reward(step.reward, corruption, ctx.global_step, corruption_rng, &offset);
    ++ctx.global_step;

    traj.states.row(i) = obs.transpose();
    traj.actions.row(i) = action.transpose();
    traj.rewards_clean(i) = step.reward;
    traj.rewards_corrupt(i) = corrupted;
    traj.done(i) = step.done ? 1.0 : 0.0;
    traj.values(i) = pv.value;
    traj.log_probs(i) = logp;
    traj.corruption_offsets(i) = offset;

    ctx.episode_return += step.reward;
    if (step.done) {
      traj.episode_returns.push_back(ctx.episode_return);
      ctx.episode_return = 0.0;
      env.reset(action_rng);
    }
  }

  const Eigen::VectorXd final_obs = visible_state(spec, env.state(), normalize_obs);
  traj.bootstrap_value = forward_policy_value(params, final_obs).value;
  return result;
}

void compute_gae(Trajectory& traj, double gamma, double lambda) {
  const Eigen::Index n = traj.size();
  traj.td_errors.resize(n);
  traj.advantages.resize(n);
  traj.returns.resize(n);
  double gae = 0.0;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    const double mask = 1.0 - traj.done(i);
    const double next_value = (i == n - 1) ? traj.bootstrap_value : traj.values(i + 1);
    const double delta =
        traj.rewards_corrupt(i) + gamma * next_value * mask - traj.values(i);
    traj.td_errors(i) = delta;
    gae = delta + gamma * lambda * mask * gae;
    traj.advantages(i) = gae;
  }
  traj.returns = traj.advantages + traj.values;
}

SampleWeights td_variance_weights(const Eigen::VectorXd& deltas, double sigma_ref) {
  if (deltas.size() == 0) {
    throw std::invalid_argument("td_variance_weights: empty delta sequence");
  }
  if (!(sigma_ref > 0.0)) {
    throw std::invalid_argument("td_variance_weights: sigma_ref must be > 0");
  }
  const double mean = deltas.mean();
  SampleWeights out;
  out.w = (sigma_ref / (sigma_ref + (deltas.array() - mean).abs())).matrix();
  out.w /= out.w.mean();
  return out;
}

double ppo_loss(const PolicyValueParams& params, const PpoBatch& batch,
                const PpoOptions& opts) {
  const Eigen::Index n = batch.states.rows();
  const BatchForward f = batch_forward(params, batch.states);
  const Eigen::ArrayXd inv_var = (-2.0 * params.log_std.array()).exp();
  const Eigen::MatrixXd diff = batch.actions - f.mean;

  Eigen::VectorXd logp(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    logp(i) =
        -0.5 * (diff.row(i).transpose().array().square() * inv_var).sum() -
        params.log_std.sum() -
        0.5 * static_cast<double>(params.action_dim()) * std::log(2.0 * std::numbers::pi);
  }
  const Eigen::ArrayXd ratio = (logp - batch.log_probs_old).array().exp();
  const Eigen::ArrayXd adv = batch.advantages.array();
  const Eigen::ArrayXd surrogate =
      (ratio * adv).min(ratio.min(1.0 + opts.clip_eps).max(1.0 - opts.clip_eps) * adv);

  const Eigen::ArrayXd value_err = f.value.array() - batch.returns.array();
  Eigen::ArrayXd value_loss;
  if (opts.value_clip_eps > 0.0) {
    const Eigen::ArrayXd dv = f.value.array() - batch.values_old.array();
    const Eigen::ArrayXd v_clipped =
        batch.values_old.array() + dv.min(opts.value_clip_eps).max(-opts.value_clip_eps);
    value_loss = value_err.square().max((v_clipped - batch.returns.array()).square());
  } else {
    value_loss = value_err.square();
  }

  const double entropy = gaussian_entropy(params.log_std);
  const Eigen::ArrayXd w = batch.weights.array();
  return (w * (-surrogate + opts.value_coef * value_loss - opts.entropy_coef * entropy))
             .sum() /
         static_cast<double>(n);
}

std::pair<double, Eigen::VectorXd> ppo_loss_grad(const PolicyValueParams& params,
                                                 const PpoBatch& batch,
                                                 const PpoOptions& opts) {
  LossGrad lg = ppo_loss_grad_impl(params, batch, opts);
  return {lg.loss, flatten(lg.grad)};
}

GradStats ppo_update(PolicyValueParams& params, const Trajectory& traj,
                     const SampleWeights& weights, double effective_lr,
                     const PpoOptions& opts, Rng& shuffle_rng,
                     std::deque<double>& norm_history) {
  const Eigen::Index n = traj.size();

  PpoBatch full;
  full.states = traj.states;
  full.actions = traj.actions;
  full.log_probs_old = traj.log_probs;
  full.returns = traj.returns;
  full.values_old = traj.values;
  full.weights = weights.w;

  // Full-batch advantage normalization, population std with a 1e-8 floor.
  const double adv_mean = traj.advantages.mean();
  const double adv_std = std::max(
      std::sqrt((traj.advantages.array() - adv_mean).square().mean()), 1e-8);
  full.advantages = ((traj.advantages.array() - adv_mean) / adv_std).matrix();

  GradStats stats;
  {
    LossGrad lg = ppo_loss_grad_impl(params, full, opts);
    stats.loss = lg.loss;
    stats.grad_norm = flatten(lg.grad).norm();
  }
  norm_history.push_back(stats.grad_norm);
  while (norm_history.size() > 10) {
    norm_history.pop_front();
  }
  {
    const double m =
        std::accumulate(norm_history.begin(), norm_history.end(), 0.0) /
        static_cast<double>(norm_history.size());
    double acc = 0.0;
    for (double v : norm_history) {
      acc += (v - m) * (v - m);
    }
    stats.norm_variance = acc / static_cast<double>(norm_history.size());
  }

  if (effective_lr == 0.0) {
    return stats;  // zero step size: parameters stay bit-identical
  }

  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    shuffle_rng.shuffle(idx);
    for (int start = 0; start < n; start += opts.minibatch) {
      const int end = std::min<int>(start + opts.minibatch, static_cast<int>(n));
      const PpoBatch mb = gather(full, idx, start, end);
      LossGrad lg = ppo_loss_grad_impl(params, mb, opts);
      if (!std::isfinite(lg.loss) || !grad_finite(lg.grad)) {
        ++stats.skipped_updates;
        continue;
      }
      apply_sgd(params, lg.grad, effective_lr);
    }
  }
  return stats;
}

}  // namespace metacog
