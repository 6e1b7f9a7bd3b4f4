#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "metacog/trust.hpp"

namespace metacog {

enum class VariantKind { base, sched, elastic, failsafe_no_recovery, symmetric, full_meta };

// Accepts the canonical names plus the aliases no-meta (base) and
// strong-meta (full_meta). Throws ConfigError otherwise.
VariantKind parse_variant_kind(const std::string& name);
std::string variant_kind_name(VariantKind kind);

// One comparison controller. Trust-family kinds (full_meta, symmetric,
// failsafe_no_recovery) carry rates; sched carries a decay slope; elastic a
// sensitivity and statistics window.
struct ControllerVariant {
  VariantKind kind = VariantKind::full_meta;
  std::string name;  // defaults to the kind name; must be unique per ablation

  double eta_up = 0.02;
  double eta_down = 0.05;
  double decay = 1.0;
  double kappa = 1.0;
  int stats_window = 10;

  static ControllerVariant of(VariantKind kind);
};

// Throws ConfigError when a kind-specific invariant is violated
// (failsafe_no_recovery requires eta_up == 0, symmetric equal rates).
void validate_variant(const ControllerVariant& v);

// Linear decay from alpha0 toward a 0.05 * alpha0 floor; `decay` scales the
// slope (1.0 reaches the floor exactly at total_iters).
double scheduled_lr(long t, double alpha0, double decay, long total_iters);

// alpha0 / (1 + kappa * nu) where nu is the coefficient of variation
// (population std / mean) of the most recent `window` gradient norms.
double elastic_lr(std::span<const double> grad_norms, double alpha0, double kappa,
                  int window = 10);

// Common per-iteration interface: every variant consumes the instability
// signal and the recent gradient norms and produces a fully populated
// ControllerOutput with effective_lr = base_lr * scale exactly. Variants that
// do not use trust log tau = 1.
class LrController {
 public:
  virtual ~LrController() = default;
  virtual ControllerOutput step(double vpes, std::span<const double> grad_norms,
                                int iteration) = 0;
};

std::unique_ptr<LrController> make_controller(const ControllerVariant& variant,
                                              double base_lr,
                                              const ControllerConfig& cfg,
                                              long total_iters);

}  // namespace metacog
