#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "metacog/config.hpp"
#include "metacog/metrics.hpp"

namespace metacog {

// <out>/<experiment>/<variant>/seed<k>
std::filesystem::path run_dir(const ExperimentConfig& cfg, const ControllerVariant& variant,
                              int seed);
std::filesystem::path experiment_dir(const ExperimentConfig& cfg);

// Executes the full training loop for one (variant, seed) pair and persists
// meta.json, iterations.log, evals.log and summary.json under run_dir.
// Divergence truncates the run but still produces complete artifacts.
RunRecord execute_run(const ExperimentConfig& cfg, const ControllerVariant& variant,
                      int seed);

// All seeds of the single configured variant, up to cfg.workers in parallel.
// Writes experiment.json (the config echo) at the experiment root and a
// report afterwards.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg);

struct AblationResult {
  std::vector<MetricSummary> rows;  // config variant order
  double rank_stability = 0.0;
  int n_resamples = 0;
  std::vector<std::vector<RunRecord>> records;  // [variant][seed]
};

// Every variant over the same seed list with paired corruption streams
// (corruption draws depend on (master_seed, seed, step) only, never on the
// variant). Requires at least two variants.
AblationResult run_ablation(const ExperimentConfig& cfg);

// Feeds a text trace of per-iteration VPES values (one real per line, '#'
// comments and blank lines allowed) through a controller variant. No learner
// or environment is involved.
std::vector<ControllerOutput> replay_trace(const std::string& trace_path,
                                           const ControllerVariant& variant,
                                           const ControllerConfig& cfg, double base_lr);

// Rebuilds a RunRecord from persisted artifacts. Throws ArtifactError listing
// the absent files if the directory is incomplete.
RunRecord load_run_record(const std::filesystem::path& dir);

// Reads the artifacts under an experiment directory and writes
// comparison.csv, plots/*.svg and report.txt.
void emit_report(const std::filesystem::path& exp_dir);

}  // namespace metacog
