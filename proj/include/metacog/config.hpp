#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "metacog/baselines.hpp"
#include "metacog/envs.hpp"
#include "metacog/learner.hpp"
#include "metacog/trust.hpp"

namespace metacog {

inline constexpr const char* kCodeVersion = "0.1.0";

struct LearnerConfig {
  int hidden = 32;
  double gamma = 0.99;
  double lambda = 0.95;
  double clip_eps = 0.2;
  int epochs = 4;
  int minibatch = 64;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double value_clip_eps = 0.0;  // 0 = off
  int rollout_steps = 512;
  double sigma_ref = 1.0;
  bool normalize_obs = false;

  PpoOptions ppo_options() const {
    return {clip_eps, epochs, minibatch, value_coef, entropy_coef, value_clip_eps};
  }
};

struct EvalConfig {
  int every_iters = 10;
  int episodes = 5;
};

// The full experiment description. A run is reproducible from the echoed
// form of this struct alone.
struct ExperimentConfig {
  std::string experiment = "experiment";
  std::string environment = "pointmass1d";
  long total_steps = 20000;
  std::uint64_t master_seed = 42;
  std::vector<int> seeds = {0, 1, 2, 3, 4};
  double base_lr = 0.05;
  int workers = 4;
  std::string out_dir = "out";
  CorruptionScheme corruption = CorruptionScheme::stationary(0.5, 10.0);
  std::vector<ControllerVariant> variants = {ControllerVariant::of(VariantKind::full_meta)};
  ControllerConfig controller;
  LearnerConfig learner;
  EvalConfig eval;
  bool quiet = false;

  long iterations() const { return total_steps / learner.rollout_steps; }
};

// Built-in profiles: "desk" (the default, minutes on a laptop) and "long"
// (the 120k-step shape).
ExperimentConfig profile_config(const std::string& name);

// Applies a JSON document on top of `cfg`. Unknown keys raise ConfigError
// naming the key and its path.
void apply_json(ExperimentConfig& cfg, const nlohmann::json& j);

// Reads and applies a JSON config file over the given base config.
ExperimentConfig load_config(const std::string& path,
                             const ExperimentConfig& base = profile_config("desk"));

// Cross-field validation; throws ConfigError on hard errors and returns
// warnings for legal-but-suspicious settings (e.g. eta_up > eta_down under
// full_meta).
std::vector<std::string> validate_config(ExperimentConfig& cfg);

// Full effective-config echo, embedded in run metadata.
nlohmann::json echo_config(const ExperimentConfig& cfg);

}  // namespace metacog
