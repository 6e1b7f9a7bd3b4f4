#include "metacog/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "metacog/errors.hpp"

namespace metacog {

VariantKind parse_variant_kind(const std::string& name) {
  if (name == "base" || name == "no-meta") return VariantKind::base;
  if (name == "sched") return VariantKind::sched;
  if (name == "elastic") return VariantKind::elastic;
  if (name == "failsafe_no_recovery") return VariantKind::failsafe_no_recovery;
  if (name == "symmetric") return VariantKind::symmetric;
  if (name == "full_meta" || name == "strong-meta") return VariantKind::full_meta;
  throw ConfigError("unknown controller variant '" + name + "'");
}

std::string variant_kind_name(VariantKind kind) {
  switch (kind) {
    case VariantKind::base: return "base";
    case VariantKind::sched: return "sched";
    case VariantKind::elastic: return "elastic";
    case VariantKind::failsafe_no_recovery: return "failsafe_no_recovery";
    case VariantKind::symmetric: return "symmetric";
    case VariantKind::full_meta: return "full_meta";
  }
  return "unknown";
}

ControllerVariant ControllerVariant::of(VariantKind kind) {
  ControllerVariant v;
  v.kind = kind;
  v.name = variant_kind_name(kind);
  switch (kind) {
    case VariantKind::full_meta:
      v.eta_up = 0.02;
      v.eta_down = 0.05;
      break;
    case VariantKind::symmetric:
      v.eta_up = 0.03;
      v.eta_down = 0.03;
      break;
    case VariantKind::failsafe_no_recovery:
      v.eta_up = 0.0;
      v.eta_down = 0.05;
      break;
    default:
      break;
  }
  return v;
}

void validate_variant(const ControllerVariant& v) {
  if (v.eta_up < 0.0 || v.eta_down < 0.0) {
    throw ConfigError("variant '" + v.name + "': eta rates must be >= 0");
  }
  if (v.kind == VariantKind::failsafe_no_recovery && v.eta_up != 0.0) {
    throw ConfigError("variant '" + v.name + "': failsafe_no_recovery requires eta_up == 0");
  }
  if (v.kind == VariantKind::symmetric && v.eta_up != v.eta_down) {
    throw ConfigError("variant '" + v.name + "': symmetric requires eta_up == eta_down");
  }
  if (v.kind == VariantKind::sched && !(v.decay > 0.0)) {
    throw ConfigError("variant '" + v.name + "': decay must be > 0");
  }
  if (v.kind == VariantKind::elastic && (!(v.kappa >= 0.0) || v.stats_window <= 0)) {
    throw ConfigError("variant '" + v.name + "': kappa must be >= 0 and window positive");
  }
}

double scheduled_lr(long t, double alpha0, double decay, long total_iters) {
  const double frac =
      static_cast<double>(t) / static_cast<double>(std::max<long>(total_iters, 1));
  const double scale = std::max(1.0 - decay * frac, 0.05);
  return alpha0 * scale;
}

double elastic_lr(std::span<const double> grad_norms, double alpha0, double kappa,
                  int window) {
  if (grad_norms.empty()) {
    throw std::invalid_argument("elastic_lr: needs at least one gradient statistic");
  }
  const std::size_t w = std::min<std::size_t>(grad_norms.size(),
                                              static_cast<std::size_t>(window));
  const auto recent = grad_norms.last(w);
  double mean = 0.0;
  for (double v : recent) mean += v;
  mean /= static_cast<double>(w);
  double var = 0.0;
  for (double v : recent) var += (v - mean) * (v - mean);
  var /= static_cast<double>(w);
  const double nu = (mean == 0.0) ? 0.0 : std::sqrt(var) / mean;
  return alpha0 / (1.0 + kappa * nu);
}

namespace {

// Shared logging plumbing: every controller maintains the VPES baseline so the
// iteration log carries vpes/baseline/trend for any variant.
class SignalTracker {
 public:
  explicit SignalTracker(const ControllerConfig& cfg)
      : state_{0.0, cfg.beta_v, false} {}

  // Returns the trend after folding in this iteration's signal.
  double observe(double vpes) {
    state_ = update_baseline(state_, vpes);
    return stability_trend(state_, vpes);
  }

  double baseline() const { return state_.baseline; }

 private:
  VpesState state_;
};

ControllerOutput make_output(int iteration, double vpes, double baseline, double trend,
                             double tau, double scale, double base_lr) {
  ControllerOutput out;
  out.iteration = iteration;
  out.vpes = vpes;
  out.baseline = baseline;
  out.trend = trend;
  out.tau = tau;
  out.scale = scale;
  out.effective_lr = base_lr * scale;
  return out;
}

class TrustFamilyController final : public LrController {
 public:
  TrustFamilyController(const ControllerVariant& v, double base_lr,
                        ControllerConfig cfg)
      : base_lr_(base_lr) {
    cfg.eta_up = v.eta_up;
    cfg.eta_down = v.eta_down;
    auto [trust, vpes_state] = reset_controller(cfg);
    trust_ = trust;
    vpes_state_ = vpes_state;
  }

  ControllerOutput step(double vpes, std::span<const double>, int iteration) override {
    ControllerStep s = step_controller(trust_, vpes_state_, vpes, base_lr_, iteration);
    trust_ = s.trust;
    vpes_state_ = s.vpes_state;
    return s.output;
  }

 private:
  double base_lr_;
  TrustState trust_;
  VpesState vpes_state_;
};

class BaseController final : public LrController {
 public:
  BaseController(double base_lr, const ControllerConfig& cfg)
      : base_lr_(base_lr), signals_(cfg) {}

  ControllerOutput step(double vpes, std::span<const double>, int iteration) override {
    const double trend = signals_.observe(vpes);
    return make_output(iteration, vpes, signals_.baseline(), trend, 1.0, 1.0, base_lr_);
  }

 private:
  double base_lr_;
  SignalTracker signals_;
};

class SchedController final : public LrController {
 public:
  SchedController(double base_lr, double decay, long total_iters,
                  const ControllerConfig& cfg)
      : base_lr_(base_lr), decay_(decay), total_iters_(total_iters), signals_(cfg) {}

  ControllerOutput step(double vpes, std::span<const double>, int iteration) override {
    const double trend = signals_.observe(vpes);
    // scheduled_lr with alpha0 = 1 yields the scale, so effective_lr stays an
    // exact base_lr * scale product.
    const double scale = scheduled_lr(iteration - 1, 1.0, decay_, total_iters_);
    return make_output(iteration, vpes, signals_.baseline(), trend, 1.0, scale, base_lr_);
  }

 private:
  double base_lr_;
  double decay_;
  long total_iters_;
  SignalTracker signals_;
};

class ElasticController final : public LrController {
 public:
  ElasticController(double base_lr, double kappa, int window,
                    const ControllerConfig& cfg)
      : base_lr_(base_lr), kappa_(kappa), window_(window), signals_(cfg) {}

  ControllerOutput step(double vpes, std::span<const double> grad_norms,
                        int iteration) override {
    const double trend = signals_.observe(vpes);
    const double scale =
        grad_norms.empty() ? 1.0 : elastic_lr(grad_norms, 1.0, kappa_, window_);
    return make_output(iteration, vpes, signals_.baseline(), trend, 1.0, scale, base_lr_);
  }

 private:
  double base_lr_;
  double kappa_;
  int window_;
  SignalTracker signals_;
};

}  // namespace

std::unique_ptr<LrController> make_controller(const ControllerVariant& variant,
                                              double base_lr,
                                              const ControllerConfig& cfg,
                                              long total_iters) {
  validate_variant(variant);
  switch (variant.kind) {
    case VariantKind::base:
      return std::make_unique<BaseController>(base_lr, cfg);
    case VariantKind::sched:
      return std::make_unique<SchedController>(base_lr, variant.decay, total_iters, cfg);
    case VariantKind::elastic:
      return std::make_unique<ElasticController>(base_lr, variant.kappa,
                                                 variant.stats_window, cfg);
    case VariantKind::failsafe_no_recovery:
    case VariantKind::symmetric:
    case VariantKind::full_meta:
      return std::make_unique<TrustFamilyController>(variant, base_lr, cfg);
  }
  throw ConfigError("unhandled controller variant");
}

}  // namespace metacog
