#pragma once

#include <map>
#include <string>
#include <vector>

#include "metacog/rng.hpp"
#include "metacog/trust.hpp"

namespace metacog {

// One seed's training evidence: per-iteration controller log, clean
// evaluation returns per checkpoint, and the divergence flag. Diverged runs
// keep everything collected before divergence.
struct RunRecord {
  int seed = 0;
  std::string variant;
  std::string environment;
  double failure_threshold = 0.0;
  std::vector<ControllerOutput> iterations;
  std::vector<double> eval_returns;
  bool diverged = false;
  std::string divergence_diagnostic;
  // In-memory trace of per-step corruption offsets (corrupted - clean),
  // used for paired-noise verification; not persisted.
  std::vector<double> corruption_offsets;
};

struct MetricSummary {
  std::string variant;
  double mean_final_return = 0.0;
  double std_final_return = 0.0;
  double cvar20 = 0.0;
  double late_failure_rate = 0.0;
  int n_seeds = 0;
};

// Mean clean evaluation return over the final ceil(tail_fraction * n)
// checkpoints. Diverged runs report the environment failure threshold.
double final_return(const RunRecord& record, double tail_fraction = 0.1);

// Average of the lowest ceil(fraction * n) values.
double cvar_at(std::vector<double> returns, double fraction);

// A run fails when every clean evaluation return in the final
// ceil(window_fraction * n) checkpoints is below the failure threshold, or
// the run diverged. All records must share one environment.
bool run_failed(const RunRecord& record, double window_fraction = 0.1);
double late_failure_rate(const std::vector<RunRecord>& records,
                         double window_fraction = 0.1);

// Fraction of bootstrap resamples (seeds drawn with replacement within each
// variant) whose mean-return ordering matches the ordering on the original
// data. Ties are broken by variant name.
double bootstrap_rank_stability(
    const std::map<std::string, std::vector<double>>& method_returns,
    int n_resamples, Rng& rng);

MetricSummary summarize(const std::string& variant,
                        const std::vector<RunRecord>& records,
                        double tail_fraction = 0.1, double window_fraction = 0.1);

}  // namespace metacog
