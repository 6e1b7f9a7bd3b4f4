#include "metacog/harness.hpp"

#include <atomic>
#include <cstdio>
#include <deque>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "metacog/errors.hpp"
#include "metacog/svg.hpp"

namespace metacog {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Eigen::VectorXd visible_state(const EnvSpec& spec, const Eigen::VectorXd& state,
                              bool normalize_obs) {
  return normalize_obs ? state.cwiseProduct(spec.obs_scale).eval() : state;
}

json finite_or_null(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}

std::string csv_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// Clean-reward evaluation episodes with the deterministic (mean) policy.
std::vector<double> evaluate_policy(const EnvSpec& spec, const PolicyValueParams& params,
                                    int episodes, Rng& rng, bool normalize_obs) {
  std::vector<double> returns;
  returns.reserve(static_cast<std::size_t>(episodes));
  Environment env(spec);
  for (int e = 0; e < episodes; ++e) {
    env.reset(rng);
    double total = 0.0;
    bool done = false;
    while (!done) {
      const Eigen::VectorXd obs = visible_state(spec, env.state(), normalize_obs);
      if (!obs.allFinite()) {
        total = spec.failure_threshold;
        break;
      }
      const PolicyValueOutput pv = forward_policy_value(params, obs);
      EnvStep s = env.step(pv.mean);
      total += s.reward;
      done = s.done;
    }
    returns.push_back(total);
  }
  return returns;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  out << content;
}

}  // namespace

fs::path experiment_dir(const ExperimentConfig& cfg) {
  return fs::path(cfg.out_dir) / cfg.experiment;
}

fs::path run_dir(const ExperimentConfig& cfg, const ControllerVariant& variant, int seed) {
  return experiment_dir(cfg) / variant.name / ("seed" + std::to_string(seed));
}

RunRecord execute_run(const ExperimentConfig& cfg, const ControllerVariant& variant,
                      int seed) {
  const EnvSpec spec = env_spec(cfg.environment);
  const fs::path dir = run_dir(cfg, variant, seed);
  fs::create_directories(dir);

  RunRecord record;
  record.seed = seed;
  record.variant = variant.name;
  record.environment = spec.name;
  record.failure_threshold = spec.failure_threshold;

  {
    json meta;
    meta["config"] = echo_config(cfg);
    meta["variant"] = variant.name;
    meta["seed"] = seed;
    meta["code_version"] = kCodeVersion;
    write_text_file(dir / "meta.json", meta.dump(2) + "\n");
  }

  const std::uint64_t sidx = static_cast<std::uint64_t>(seed);
  Rng init_rng(cfg.master_seed, sidx, "policy-init");
  Rng action_rng(cfg.master_seed, sidx, "rollout-action");
  Rng corruption_rng(cfg.master_seed, sidx, "corruption");
  Rng shuffle_rng(cfg.master_seed, sidx, "minibatch-shuffle");
  Rng eval_rng(cfg.master_seed, sidx, "eval");

  NetConfig net{spec.state_dim, spec.action_dim, cfg.learner.hidden};
  PolicyValueParams params = init_params(net, init_rng);
  Environment env(spec);
  RolloutContext ctx;
  auto controller = make_controller(variant, cfg.base_lr, cfg.controller, cfg.iterations());
  const PpoOptions ppo_opts = cfg.learner.ppo_options();
  std::deque<double> norm_history;
  std::vector<double> norm_window;  // recent grad norms handed to the controller

  std::ofstream iter_log(dir / "iterations.log", std::ios::binary);
  std::ofstream eval_log(dir / "evals.log", std::ios::binary);
  if (!iter_log || !eval_log) {
    throw std::runtime_error("cannot open log files under '" + dir.string() + "'");
  }

  const long iterations = cfg.iterations();
  for (long t = 1; t <= iterations; ++t) {
    RolloutResult rollout =
        collect_rollout(env, params, cfg.learner.rollout_steps, cfg.corruption,
                        action_rng, corruption_rng, ctx, cfg.learner.normalize_obs);
    if (rollout.diverged) {
      record.diverged = true;
      record.divergence_diagnostic = rollout.diagnostic;
      break;
    }
    Trajectory& traj = rollout.trajectory;
    compute_gae(traj, cfg.learner.gamma, cfg.learner.lambda);

    for (Eigen::Index i = 0; i < traj.size(); ++i) {
      record.corruption_offsets.push_back(traj.corruption_offsets(i));
    }

    TdWindow window{cfg.controller.window_capacity, {}};
    ControllerOutput out;
    GradStats stats;
    try {
      for (Eigen::Index i = 0; i < traj.size(); ++i) {
        window = push_td_error(std::move(window), traj.td_errors(i));
      }
      const double vpes = compute_vpes(window);
      if (!std::isfinite(vpes)) {
        // Finite TD errors whose variance overflows: the value function has
        // effectively diverged.
        record.diverged = true;
        record.divergence_diagnostic =
            "instability signal overflow at iteration " + std::to_string(t);
        break;
      }
      out = controller->step(vpes, norm_window, static_cast<int>(t));
      const SampleWeights weights =
          td_variance_weights(traj.td_errors, cfg.learner.sigma_ref);
      stats = ppo_update(params, traj, weights, out.effective_lr, ppo_opts, shuffle_rng,
                         norm_history);
    } catch (const DataError& e) {
      record.diverged = true;
      record.divergence_diagnostic = e.what();
      break;
    }
    norm_window.push_back(stats.grad_norm);
    if (norm_window.size() > 10) {
      norm_window.erase(norm_window.begin());
    }
    record.iterations.push_back(out);

    json line;
    line["iteration"] = out.iteration;
    line["vpes"] = finite_or_null(out.vpes);
    line["baseline"] = finite_or_null(out.baseline);
    line["trend"] = finite_or_null(out.trend);
    line["tau"] = out.tau;
    line["scale"] = out.scale;
    line["effective_lr"] = out.effective_lr;
    line["loss"] = finite_or_null(stats.loss);
    line["grad_norm"] = finite_or_null(stats.grad_norm);
    line["skipped_updates"] = stats.skipped_updates;
    line["episodes"] = traj.episode_returns.size();
    if (traj.episode_returns.empty()) {
      line["mean_return"] = nullptr;
    } else {
      double sum = 0.0;
      for (double r : traj.episode_returns) sum += r;
      line["mean_return"] =
          finite_or_null(sum / static_cast<double>(traj.episode_returns.size()));
    }
    iter_log << line.dump() << "\n";

    if (t % cfg.eval.every_iters == 0 || t == iterations) {
      const std::vector<double> returns = evaluate_policy(
          spec, params, cfg.eval.episodes, eval_rng, cfg.learner.normalize_obs);
      double mean = 0.0;
      for (double r : returns) mean += r;
      mean /= static_cast<double>(returns.size());
      record.eval_returns.push_back(mean);

      json eline;
      eline["iteration"] = static_cast<int>(t);
      eline["mean_return"] = finite_or_null(mean);
      eline["returns"] = returns;
      eval_log << eline.dump() << "\n";
    }
  }
  iter_log.close();
  eval_log.close();

  {
    json summary;
    summary["variant"] = variant.name;
    summary["seed"] = seed;
    summary["environment"] = spec.name;
    summary["failure_threshold"] = spec.failure_threshold;
    summary["iterations_completed"] = record.iterations.size();
    summary["eval_checkpoints"] = record.eval_returns.size();
    summary["diverged"] = record.diverged;
    if (record.diverged) {
      summary["divergence"] = record.divergence_diagnostic;
    }
    summary["final_return"] = final_return(record);
    summary["failed_late"] = run_failed(record);
    write_text_file(dir / "summary.json", summary.dump(2) + "\n");
  }
  return record;
}

namespace {

struct Job {
  int variant_index;
  int seed;
};

// Runs all (variant, seed) jobs on a small worker pool; each run owns its rng
// streams and files, so the only shared state is the job queue itself.
std::vector<std::vector<RunRecord>> run_all(const ExperimentConfig& cfg) {
  std::vector<Job> jobs;
  for (int vi = 0; vi < static_cast<int>(cfg.variants.size()); ++vi) {
    for (int seed : cfg.seeds) {
      jobs.push_back({vi, seed});
    }
  }
  std::vector<std::vector<RunRecord>> records(cfg.variants.size());
  for (auto& r : records) {
    r.resize(cfg.seeds.size());
  }
  std::map<int, std::size_t> seed_slot;
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    seed_slot[cfg.seeds[i]] = i;
  }

  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;
  std::vector<std::exception_ptr> errors(jobs.size());
  auto worker = [&]() {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) {
        return;
      }
      const Job job = jobs[k];
      try {
        RunRecord rec = execute_run(cfg, cfg.variants[static_cast<std::size_t>(
                                             job.variant_index)],
                                    job.seed);
        if (!cfg.quiet) {
          std::lock_guard<std::mutex> lock(io_mutex);
          std::cout << "run " << rec.variant << " seed " << rec.seed << ": "
                    << (rec.diverged ? "diverged" : "ok") << "\n";
        }
        records[static_cast<std::size_t>(job.variant_index)][seed_slot[job.seed]] =
            std::move(rec);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };

  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), jobs.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < n_workers; ++i) {
    pool.emplace_back(worker);
  }
  for (auto& th : pool) {
    th.join();
  }
  for (const auto& err : errors) {
    if (err) {
      std::rethrow_exception(err);
    }
  }
  return records;
}

void write_experiment_echo(const ExperimentConfig& cfg) {
  fs::create_directories(experiment_dir(cfg));
  write_text_file(experiment_dir(cfg) / "experiment.json",
                  echo_config(cfg).dump(2) + "\n");
}

}  // namespace

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg) {
  ExperimentConfig validated = cfg;
  validate_config(validated);
  if (validated.variants.size() != 1) {
    throw ConfigError("run_experiment expects exactly one variant (use the ablation "
                      "runner for comparisons)");
  }
  write_experiment_echo(validated);
  auto records = run_all(validated);
  emit_report(experiment_dir(validated));
  return records[0];
}

AblationResult run_ablation(const ExperimentConfig& cfg) {
  ExperimentConfig validated = cfg;
  validate_config(validated);
  if (validated.variants.size() < 2) {
    throw ConfigError("ablation requires at least two variants");
  }
  write_experiment_echo(validated);

  AblationResult result;
  result.records = run_all(validated);

  std::map<std::string, std::vector<double>> finals;
  for (std::size_t vi = 0; vi < validated.variants.size(); ++vi) {
    const std::string& name = validated.variants[vi].name;
    result.rows.push_back(summarize(name, result.records[vi]));
    for (const RunRecord& r : result.records[vi]) {
      finals[name].push_back(final_return(r));
    }
  }
  result.n_resamples = 10000;
  Rng bootstrap_rng(validated.master_seed, 0, "bootstrap");
  result.rank_stability =
      bootstrap_rank_stability(finals, result.n_resamples, bootstrap_rng);

  emit_report(experiment_dir(validated));
  return result;
}

std::vector<ControllerOutput> replay_trace(const std::string& trace_path,
                                           const ControllerVariant& variant,
                                           const ControllerConfig& cfg, double base_lr) {
  std::ifstream in(trace_path);
  if (!in) {
    throw ConfigError("cannot open trace file '" + trace_path + "'");
  }
  std::vector<double> values;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') {
      continue;
    }
    std::size_t consumed = 0;
    double v = 0.0;
    try {
      v = std::stod(line.substr(first), &consumed);
    } catch (const std::exception&) {
      throw DataError("trace line " + std::to_string(line_no) + ": not a number: '" +
                      line + "'");
    }
    const auto rest = line.find_first_not_of(" \t\r", first + consumed);
    if (rest != std::string::npos) {
      throw DataError("trace line " + std::to_string(line_no) + ": trailing junk: '" +
                      line + "'");
    }
    if (!std::isfinite(v) || v < 0.0) {
      throw DataError("trace line " + std::to_string(line_no) +
                      ": vpes must be finite and >= 0");
    }
    values.push_back(v);
  }

  auto controller =
      make_controller(variant, base_lr, cfg, static_cast<long>(values.size()));
  std::vector<ControllerOutput> outputs;
  outputs.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    outputs.push_back(controller->step(values[i], {}, static_cast<int>(i + 1)));
  }
  return outputs;
}

RunRecord load_run_record(const fs::path& dir) {
  const fs::path meta_path = dir / "meta.json";
  const fs::path iter_path = dir / "iterations.log";
  const fs::path eval_path = dir / "evals.log";
  const fs::path summary_path = dir / "summary.json";
  std::vector<std::string> missing;
  for (const fs::path& p : {meta_path, iter_path, eval_path, summary_path}) {
    if (!fs::exists(p)) {
      missing.push_back(p.string());
    }
  }
  if (!missing.empty()) {
    std::string msg = "incomplete run artifacts in '" + dir.string() + "': missing";
    for (const std::string& m : missing) {
      msg += " " + m;
    }
    throw ArtifactError(msg);
  }

  RunRecord record;
  {
    std::ifstream in(summary_path);
    json s = json::parse(in);
    record.seed = s.at("seed").get<int>();
    record.variant = s.at("variant").get<std::string>();
    record.environment = s.at("environment").get<std::string>();
    record.failure_threshold = s.at("failure_threshold").get<double>();
    record.diverged = s.at("diverged").get<bool>();
    if (s.contains("divergence")) {
      record.divergence_diagnostic = s.at("divergence").get<std::string>();
    }
  }
  {
    std::ifstream in(iter_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j = json::parse(line);
      ControllerOutput out;
      out.iteration = j.at("iteration").get<int>();
      auto num = [&](const char* key) {
        return j.at(key).is_null() ? std::numeric_limits<double>::quiet_NaN()
                                   : j.at(key).get<double>();
      };
      out.vpes = num("vpes");
      out.baseline = num("baseline");
      out.trend = num("trend");
      out.tau = j.at("tau").get<double>();
      out.scale = j.at("scale").get<double>();
      out.effective_lr = j.at("effective_lr").get<double>();
      record.iterations.push_back(out);
    }
  }
  {
    std::ifstream in(eval_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j = json::parse(line);
      record.eval_returns.push_back(j.at("mean_return").get<double>());
    }
  }
  return record;
}

void emit_report(const fs::path& exp_dir) {
  const fs::path echo_path = exp_dir / "experiment.json";
  if (!fs::exists(echo_path)) {
    throw ArtifactError("incomplete experiment artifacts: missing " + echo_path.string());
  }
  ExperimentConfig cfg = profile_config("desk");
  {
    std::ifstream in(echo_path);
    apply_json(cfg, json::parse(in));
  }

  std::vector<std::vector<RunRecord>> records;
  std::vector<std::string> names;
  for (const ControllerVariant& v : cfg.variants) {
    names.push_back(v.name);
    std::vector<RunRecord> rs;
    for (int seed : cfg.seeds) {
      rs.push_back(load_run_record(exp_dir / v.name / ("seed" + std::to_string(seed))));
    }
    records.push_back(std::move(rs));
  }

  // comparison.csv, one row per variant in config order.
  std::string csv = "variant,final_return,std,cvar20,late_failure_rate\n";
  std::vector<MetricSummary> rows;
  for (std::size_t vi = 0; vi < records.size(); ++vi) {
    MetricSummary s = summarize(names[vi], records[vi]);
    rows.push_back(s);
    csv += s.variant + "," + csv_num(s.mean_final_return) + "," +
           csv_num(s.std_final_return) + "," + csv_num(s.cvar20) + "," +
           csv_num(s.late_failure_rate) + "\n";
  }
  write_text_file(exp_dir / "comparison.csv", csv);

  // Plots: control dynamics per run plus the per-seed final-return bars.
  const fs::path plot_dir = exp_dir / "plots";
  fs::create_directories(plot_dir);
  std::vector<std::vector<double>> finals(records.size());
  for (std::size_t vi = 0; vi < records.size(); ++vi) {
    for (const RunRecord& r : records[vi]) {
      finals[vi].push_back(final_return(r));
      const std::string stem =
          "dynamics_" + r.variant + "_seed" + std::to_string(r.seed);
      write_text_file(plot_dir / (stem + ".svg"),
                      dynamics_chart_svg(r.iterations,
                                         r.variant + " seed " + std::to_string(r.seed)));
    }
  }
  write_text_file(plot_dir / "final_returns.svg",
                  grouped_bar_chart_svg(names, finals, "final returns per seed"));

  // Plain-text digest.
  std::string digest;
  digest += "experiment: " + cfg.experiment + "\n";
  digest += "environment: " + cfg.environment + "\n";
  digest += "seeds: " + std::to_string(cfg.seeds.size()) + "\n\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-24s %14s %12s %12s %10s\n", "variant",
                "final_return", "std", "cvar20", "late_fail");
  digest += buf;
  for (const MetricSummary& s : rows) {
    std::snprintf(buf, sizeof(buf), "%-24s %14.4f %12.4f %12.4f %10.2f\n",
                  s.variant.c_str(), s.mean_final_return, s.std_final_return, s.cvar20,
                  s.late_failure_rate);
    digest += buf;
  }
  if (records.size() >= 2) {
    std::map<std::string, std::vector<double>> finals_by_name;
    for (std::size_t vi = 0; vi < records.size(); ++vi) {
      finals_by_name[names[vi]] = finals[vi];
    }
    Rng bootstrap_rng(cfg.master_seed, 0, "bootstrap");
    const double stability = bootstrap_rank_stability(finals_by_name, 10000, bootstrap_rng);
    std::snprintf(buf, sizeof(buf),
                  "\nbootstrap rank stability: %.4f (10000 resamples)\n", stability);
    digest += buf;
  }
  digest += "\nruns:\n";
  for (std::size_t vi = 0; vi < records.size(); ++vi) {
    for (const RunRecord& r : records[vi]) {
      std::snprintf(buf, sizeof(buf), "  %-24s seed %-4d final %12.4f%s%s\n",
                    r.variant.c_str(), r.seed, final_return(r),
                    r.diverged ? " [diverged]" : "",
                    run_failed(r) ? " [late-failure]" : "");
      digest += buf;
    }
  }
  write_text_file(exp_dir / "report.txt", digest);
}

}  // namespace metacog
