#include "metacog/config.hpp"

#include <fstream>
#include <set>
#include <unordered_set>

#include "metacog/errors.hpp"

namespace metacog {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& path) {
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) {
      throw ConfigError("unknown key '" + key + "' at " + path);
    }
  }
}

double get_number(const json& j, const std::string& key, const std::string& path) {
  if (!j.at(key).is_number()) {
    throw ConfigError("key '" + key + "' at " + path + " must be a number");
  }
  return j.at(key).get<double>();
}

long get_integer(const json& j, const std::string& key, const std::string& path) {
  if (!j.at(key).is_number_integer()) {
    throw ConfigError("key '" + key + "' at " + path + " must be an integer");
  }
  return j.at(key).get<long>();
}

std::string get_string(const json& j, const std::string& key, const std::string& path) {
  if (!j.at(key).is_string()) {
    throw ConfigError("key '" + key + "' at " + path + " must be a string");
  }
  return j.at(key).get<std::string>();
}

bool get_bool(const json& j, const std::string& key, const std::string& path) {
  if (!j.at(key).is_boolean()) {
    throw ConfigError("key '" + key + "' at " + path + " must be a boolean");
  }
  return j.at(key).get<bool>();
}

void apply_corruption(CorruptionScheme& scheme, const json& j, const std::string& path) {
  reject_unknown_keys(j, {"mode", "p", "p_start", "p_end", "xi", "total_steps"}, path);
  if (j.contains("mode")) {
    const std::string mode = get_string(j, "mode", path);
    if (mode == "none") {
      scheme.mode = CorruptionMode::none;
      scheme.p_start = scheme.p_end = 0.0;
    } else if (mode == "stationary") {
      scheme.mode = CorruptionMode::stationary;
    } else if (mode == "linear") {
      scheme.mode = CorruptionMode::linear;
    } else {
      throw ConfigError("unknown corruption mode '" + mode + "' at " + path);
    }
  }
  if (j.contains("p")) {
    const double p = get_number(j, "p", path);
    scheme.p_start = scheme.p_end = p;
  }
  if (j.contains("p_start")) scheme.p_start = get_number(j, "p_start", path);
  if (j.contains("p_end")) scheme.p_end = get_number(j, "p_end", path);
  if (j.contains("xi")) scheme.xi = get_number(j, "xi", path);
  if (j.contains("total_steps")) {
    scheme.total_steps = get_integer(j, "total_steps", path);
  }
}

void apply_variant(ControllerVariant& v, const json& j, const std::string& path) {
  reject_unknown_keys(j, {"kind", "name", "eta_up", "eta_down", "decay", "kappa", "window"},
                      path);
  if (!j.contains("kind")) {
    throw ConfigError("variant at " + path + " is missing 'kind'");
  }
  v = ControllerVariant::of(parse_variant_kind(get_string(j, "kind", path)));
  if (j.contains("name")) v.name = get_string(j, "name", path);
  if (j.contains("eta_up")) v.eta_up = get_number(j, "eta_up", path);
  if (j.contains("eta_down")) v.eta_down = get_number(j, "eta_down", path);
  if (j.contains("decay")) v.decay = get_number(j, "decay", path);
  if (j.contains("kappa")) v.kappa = get_number(j, "kappa", path);
  if (j.contains("window")) v.stats_window = static_cast<int>(get_integer(j, "window", path));
}

void apply_controller(ControllerConfig& c, const json& j, const std::string& path) {
  reject_unknown_keys(
      j, {"tau0", "eta_up", "eta_down", "tau_min", "c_max", "beta_v", "window"}, path);
  if (j.contains("tau0")) c.tau0 = get_number(j, "tau0", path);
  if (j.contains("eta_up")) c.eta_up = get_number(j, "eta_up", path);
  if (j.contains("eta_down")) c.eta_down = get_number(j, "eta_down", path);
  if (j.contains("tau_min")) c.tau_min = get_number(j, "tau_min", path);
  if (j.contains("c_max")) c.c_max = get_number(j, "c_max", path);
  if (j.contains("beta_v")) c.beta_v = get_number(j, "beta_v", path);
  if (j.contains("window")) {
    const long w = get_integer(j, "window", path);
    if (w <= 0) throw ConfigError("controller.window must be positive");
    c.window_capacity = static_cast<std::size_t>(w);
  }
}

void apply_learner(LearnerConfig& l, const json& j, const std::string& path) {
  reject_unknown_keys(j,
                      {"hidden", "gamma", "lambda", "clip_eps", "epochs", "minibatch",
                       "entropy_coef", "value_coef", "value_clip_eps", "rollout_steps",
                       "sigma_ref", "normalize_obs"},
                      path);
  if (j.contains("hidden")) l.hidden = static_cast<int>(get_integer(j, "hidden", path));
  if (j.contains("gamma")) l.gamma = get_number(j, "gamma", path);
  if (j.contains("lambda")) l.lambda = get_number(j, "lambda", path);
  if (j.contains("clip_eps")) l.clip_eps = get_number(j, "clip_eps", path);
  if (j.contains("epochs")) l.epochs = static_cast<int>(get_integer(j, "epochs", path));
  if (j.contains("minibatch")) {
    l.minibatch = static_cast<int>(get_integer(j, "minibatch", path));
  }
  if (j.contains("entropy_coef")) l.entropy_coef = get_number(j, "entropy_coef", path);
  if (j.contains("value_coef")) l.value_coef = get_number(j, "value_coef", path);
  if (j.contains("value_clip_eps")) {
    l.value_clip_eps = get_number(j, "value_clip_eps", path);
  }
  if (j.contains("rollout_steps")) {
    l.rollout_steps = static_cast<int>(get_integer(j, "rollout_steps", path));
  }
  if (j.contains("sigma_ref")) l.sigma_ref = get_number(j, "sigma_ref", path);
  if (j.contains("normalize_obs")) l.normalize_obs = get_bool(j, "normalize_obs", path);
}

void apply_eval(EvalConfig& e, const json& j, const std::string& path) {
  reject_unknown_keys(j, {"every_iters", "episodes"}, path);
  if (j.contains("every_iters")) {
    e.every_iters = static_cast<int>(get_integer(j, "every_iters", path));
  }
  if (j.contains("episodes")) {
    e.episodes = static_cast<int>(get_integer(j, "episodes", path));
  }
}

}  // namespace

ExperimentConfig profile_config(const std::string& name) {
  ExperimentConfig cfg;  // defaults are the desk profile
  if (name == "desk") {
    cfg.experiment = "desk";
    return cfg;
  }
  if (name == "long") {
    cfg.experiment = "long";
    cfg.environment = "pendulum";
    cfg.total_steps = 120000;
    return cfg;
  }
  throw ConfigError("unknown profile '" + name + "' (expected 'desk' or 'long')");
}

void apply_json(ExperimentConfig& cfg, const json& j) {
  if (!j.is_object()) {
    throw ConfigError("config root must be a JSON object");
  }
  reject_unknown_keys(j,
                      {"experiment", "environment", "total_steps", "master_seed", "seeds",
                       "base_lr", "workers", "out", "corruption", "variants", "variant",
                       "controller", "learner", "eval", "quiet"},
                      "<root>");
  const std::string root = "<root>";
  if (j.contains("experiment")) cfg.experiment = get_string(j, "experiment", root);
  if (j.contains("environment")) cfg.environment = get_string(j, "environment", root);
  if (j.contains("total_steps")) cfg.total_steps = get_integer(j, "total_steps", root);
  if (j.contains("master_seed")) {
    cfg.master_seed = static_cast<std::uint64_t>(get_integer(j, "master_seed", root));
  }
  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    cfg.seeds.clear();
    if (s.is_number_integer()) {
      const long n = s.get<long>();
      if (n <= 0) throw ConfigError("seeds count must be positive");
      for (long i = 0; i < n; ++i) cfg.seeds.push_back(static_cast<int>(i));
    } else if (s.is_array()) {
      for (const auto& e : s) {
        if (!e.is_number_integer()) {
          throw ConfigError("seeds list entries must be integers");
        }
        cfg.seeds.push_back(e.get<int>());
      }
    } else {
      throw ConfigError("seeds must be an integer count or a list of integers");
    }
  }
  if (j.contains("base_lr")) cfg.base_lr = get_number(j, "base_lr", root);
  if (j.contains("workers")) {
    cfg.workers = static_cast<int>(get_integer(j, "workers", root));
  }
  if (j.contains("out")) cfg.out_dir = get_string(j, "out", root);
  if (j.contains("corruption")) {
    apply_corruption(cfg.corruption, j.at("corruption"), "corruption");
  }
  if (j.contains("variant") && j.contains("variants")) {
    throw ConfigError("specify either 'variant' or 'variants', not both");
  }
  if (j.contains("variant")) {
    cfg.variants.clear();
    ControllerVariant v;
    apply_variant(v, j.at("variant"), "variant");
    cfg.variants.push_back(v);
  }
  if (j.contains("variants")) {
    if (!j.at("variants").is_array() || j.at("variants").empty()) {
      throw ConfigError("'variants' must be a non-empty array");
    }
    cfg.variants.clear();
    int i = 0;
    for (const auto& e : j.at("variants")) {
      ControllerVariant v;
      apply_variant(v, e, "variants[" + std::to_string(i) + "]");
      cfg.variants.push_back(v);
      ++i;
    }
  }
  if (j.contains("controller")) {
    apply_controller(cfg.controller, j.at("controller"), "controller");
  }
  if (j.contains("learner")) apply_learner(cfg.learner, j.at("learner"), "learner");
  if (j.contains("eval")) apply_eval(cfg.eval, j.at("eval"), "eval");
  if (j.contains("quiet")) cfg.quiet = get_bool(j, "quiet", root);
}

ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("parse error in '" + path + "': " + e.what());
  }
  ExperimentConfig cfg = base;
  apply_json(cfg, j);
  return cfg;
}

std::vector<std::string> validate_config(ExperimentConfig& cfg) {
  std::vector<std::string> warnings;

  env_spec(cfg.environment);  // throws on unknown names
  if (cfg.total_steps <= 0) throw ConfigError("total_steps must be positive");
  if (cfg.seeds.empty()) throw ConfigError("at least one seed is required");
  {
    std::unordered_set<int> uniq(cfg.seeds.begin(), cfg.seeds.end());
    if (uniq.size() != cfg.seeds.size()) throw ConfigError("seeds must be distinct");
  }
  if (!(cfg.base_lr > 0.0)) throw ConfigError("base_lr must be positive");
  if (cfg.workers <= 0) throw ConfigError("workers must be positive");
  if (cfg.learner.rollout_steps <= 0) {
    throw ConfigError("learner.rollout_steps must be positive");
  }
  if (cfg.total_steps < cfg.learner.rollout_steps) {
    throw ConfigError("total_steps must be at least one rollout");
  }
  if (cfg.learner.hidden <= 0) throw ConfigError("learner.hidden must be positive");
  if (cfg.learner.epochs <= 0) throw ConfigError("learner.epochs must be positive");
  if (cfg.learner.minibatch <= 0) throw ConfigError("learner.minibatch must be positive");
  if (!(cfg.learner.gamma > 0.0 && cfg.learner.gamma <= 1.0)) {
    throw ConfigError("learner.gamma must lie in (0, 1]");
  }
  if (!(cfg.learner.lambda >= 0.0 && cfg.learner.lambda <= 1.0)) {
    throw ConfigError("learner.lambda must lie in [0, 1]");
  }
  if (!(cfg.learner.clip_eps > 0.0 && cfg.learner.clip_eps < 1.0)) {
    throw ConfigError("learner.clip_eps must lie in (0, 1)");
  }
  if (!(cfg.learner.sigma_ref > 0.0)) {
    throw ConfigError("learner.sigma_ref must be positive");
  }
  if (cfg.eval.every_iters <= 0 || cfg.eval.episodes <= 0) {
    throw ConfigError("eval cadence and episode count must be positive");
  }

  cfg.corruption.total_steps = cfg.total_steps;  // schedule horizon T
  validate_corruption(cfg.corruption);

  for (auto& w : validate_controller_config(cfg.controller)) {
    warnings.push_back("controller: " + w);
  }

  if (cfg.variants.empty()) throw ConfigError("at least one variant is required");
  std::unordered_set<std::string> names;
  for (const ControllerVariant& v : cfg.variants) {
    validate_variant(v);
    if (!names.insert(v.name).second) {
      throw ConfigError("duplicate variant name '" + v.name +
                        "' (set 'name' to disambiguate)");
    }
    if (v.kind == VariantKind::full_meta && v.eta_up > v.eta_down) {
      warnings.push_back("variant '" + v.name +
                         "': eta_up > eta_down inverts the intended asymmetry");
    }
  }
  return warnings;
}

nlohmann::json echo_config(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = cfg.experiment;
  j["environment"] = cfg.environment;
  j["total_steps"] = cfg.total_steps;
  j["master_seed"] = cfg.master_seed;
  j["seeds"] = cfg.seeds;
  j["base_lr"] = cfg.base_lr;
  j["workers"] = cfg.workers;
  j["out"] = cfg.out_dir;
  j["quiet"] = cfg.quiet;

  json c;
  switch (cfg.corruption.mode) {
    case CorruptionMode::none: c["mode"] = "none"; break;
    case CorruptionMode::stationary: c["mode"] = "stationary"; break;
    case CorruptionMode::linear: c["mode"] = "linear"; break;
  }
  c["p_start"] = cfg.corruption.p_start;
  c["p_end"] = cfg.corruption.p_end;
  c["xi"] = cfg.corruption.xi;
  c["total_steps"] = cfg.corruption.total_steps;
  j["corruption"] = c;

  json vs = json::array();
  for (const ControllerVariant& v : cfg.variants) {
    json e;
    e["kind"] = variant_kind_name(v.kind);
    e["name"] = v.name;
    e["eta_up"] = v.eta_up;
    e["eta_down"] = v.eta_down;
    e["decay"] = v.decay;
    e["kappa"] = v.kappa;
    e["window"] = v.stats_window;
    vs.push_back(e);
  }
  j["variants"] = vs;

  json ctrl;
  ctrl["tau0"] = cfg.controller.tau0;
  ctrl["eta_up"] = cfg.controller.eta_up;
  ctrl["eta_down"] = cfg.controller.eta_down;
  ctrl["tau_min"] = cfg.controller.tau_min;
  ctrl["c_max"] = cfg.controller.c_max;
  ctrl["beta_v"] = cfg.controller.beta_v;
  ctrl["window"] = cfg.controller.window_capacity;
  j["controller"] = ctrl;

  json l;
  l["hidden"] = cfg.learner.hidden;
  l["gamma"] = cfg.learner.gamma;
  l["lambda"] = cfg.learner.lambda;
  l["clip_eps"] = cfg.learner.clip_eps;
  l["epochs"] = cfg.learner.epochs;
  l["minibatch"] = cfg.learner.minibatch;
  l["entropy_coef"] = cfg.learner.entropy_coef;
  l["value_coef"] = cfg.learner.value_coef;
  l["value_clip_eps"] = cfg.learner.value_clip_eps;
  l["rollout_steps"] = cfg.learner.rollout_steps;
  l["sigma_ref"] = cfg.learner.sigma_ref;
  l["normalize_obs"] = cfg.learner.normalize_obs;
  j["learner"] = l;

  json ev;
  ev["every_iters"] = cfg.eval.every_iters;
  ev["episodes"] = cfg.eval.episodes;
  j["eval"] = ev;

  return j;
}

}  // namespace metacog
