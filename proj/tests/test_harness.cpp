#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "metacog/errors.hpp"
#include "metacog/harness.hpp"

using namespace metacog;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("metacog_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig tiny_config(const std::string& tag) {
  ExperimentConfig cfg = profile_config("desk");
  cfg.experiment = tag;
  cfg.out_dir = fresh_dir(tag).string();
  cfg.total_steps = 1024;
  cfg.learner.rollout_steps = 256;
  cfg.seeds = {0, 1};
  cfg.eval.every_iters = 2;
  cfg.eval.episodes = 2;
  cfg.workers = 2;
  cfg.quiet = true;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("run_experiment produces complete artifacts and sane records") {
  ExperimentConfig cfg = tiny_config("run");
  const auto records = run_experiment(cfg);
  REQUIRE(records.size() == 2);
  // 1024 / 256 = 4 iterations, evals at 2 and 4.
  for (const RunRecord& r : records) {
    CHECK(r.iterations.size() == 4);
    CHECK(r.eval_returns.size() == 2);
    CHECK_FALSE(r.diverged);
    CHECK(r.corruption_offsets.size() == 1024);
  }

  for (int seed : {0, 1}) {
    const fs::path dir = run_dir(cfg, cfg.variants[0], seed);
    for (const char* f : {"meta.json", "iterations.log", "evals.log", "summary.json"}) {
      CHECK(fs::exists(dir / f));
    }
    const RunRecord loaded = load_run_record(dir);
    CHECK(loaded.seed == seed);
    CHECK(loaded.iterations.size() == 4);
    CHECK(loaded.eval_returns.size() == 2);
  }
  CHECK(fs::exists(experiment_dir(cfg) / "experiment.json"));
  CHECK(fs::exists(experiment_dir(cfg) / "comparison.csv"));
  CHECK(fs::exists(experiment_dir(cfg) / "report.txt"));
  CHECK(fs::exists(experiment_dir(cfg) / "plots" / "final_returns.svg"));
  fs::remove_all(cfg.out_dir);
}

TEST_CASE("reruns of one config are byte-identical") {
  ExperimentConfig cfg = tiny_config("det_a");
  run_experiment(cfg);
  const std::string log_a =
      slurp(run_dir(cfg, cfg.variants[0], 0) / "iterations.log");
  const std::string sum_a = slurp(run_dir(cfg, cfg.variants[0], 0) / "summary.json");
  REQUIRE_FALSE(log_a.empty());

  ExperimentConfig cfg_b = tiny_config("det_b");
  cfg_b.experiment = "det_a";  // same experiment name, different out dir
  run_experiment(cfg_b);
  CHECK(slurp(run_dir(cfg_b, cfg_b.variants[0], 0) / "iterations.log") == log_a);
  CHECK(slurp(run_dir(cfg_b, cfg_b.variants[0], 0) / "summary.json") == sum_a);
  fs::remove_all(cfg.out_dir);
  fs::remove_all(cfg_b.out_dir);
}

TEST_CASE("run_experiment insists on a single variant") {
  ExperimentConfig cfg = tiny_config("multi");
  cfg.variants.push_back(ControllerVariant::of(VariantKind::base));
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
  fs::remove_all(cfg.out_dir);
}

TEST_CASE("run_ablation pairs corruption draws across variants") {
  ExperimentConfig cfg = tiny_config("ablate");
  cfg.variants = {ControllerVariant::of(VariantKind::full_meta),
                  ControllerVariant::of(VariantKind::base)};
  const AblationResult result = run_ablation(cfg);
  REQUIRE(result.rows.size() == 2);
  CHECK(result.rows[0].variant == "full_meta");
  CHECK(result.rows[1].variant == "base");
  CHECK(result.rank_stability >= 0.0);
  CHECK(result.rank_stability <= 1.0);

  // Paired noise: identical corruption offsets at identical step indices.
  for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
    const auto& a = result.records[0][s].corruption_offsets;
    const auto& b = result.records[1][s].corruption_offsets;
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      REQUIRE(a[i] == b[i]);
    }
  }

  const std::string csv = slurp(experiment_dir(cfg) / "comparison.csv");
  CHECK(csv.find("variant,final_return,std,cvar20,late_failure_rate") == 0);
  CHECK(csv.find("full_meta,") != std::string::npos);
  CHECK(csv.find("base,") != std::string::npos);

  // Bar chart: one bar per (variant, seed) plus the background and frame.
  const std::string bars = slurp(experiment_dir(cfg) / "plots" / "final_returns.svg");
  std::size_t rects = 0;
  for (std::size_t pos = bars.find("<rect"); pos != std::string::npos;
       pos = bars.find("<rect", pos + 1)) {
    ++rects;
  }
  CHECK(rects == 2 * cfg.seeds.size() + 2);
  fs::remove_all(cfg.out_dir);
}

TEST_CASE("run_ablation refuses a single variant") {
  ExperimentConfig cfg = tiny_config("ablate1");
  CHECK_THROWS_AS(run_ablation(cfg), ConfigError);
  fs::remove_all(cfg.out_dir);
}

TEST_CASE("diverged runs keep complete artifacts and count as failures") {
  // base at lr 0.3 on collapse_valley under heavy corruption diverges
  // deterministically for this master seed (value-function explosion).
  ExperimentConfig cfg = tiny_config("diverge");
  cfg.environment = "collapse_valley";
  cfg.total_steps = 20000;
  cfg.learner.rollout_steps = 512;
  cfg.base_lr = 0.3;
  cfg.master_seed = 42;
  cfg.seeds = {0};
  cfg.variants = {ControllerVariant::of(VariantKind::base)};
  const auto records = run_experiment(cfg);
  REQUIRE(records.size() == 1);
  const RunRecord& r = records[0];
  CHECK(r.diverged);
  CHECK_FALSE(r.divergence_diagnostic.empty());
  CHECK(final_return(r) == r.failure_threshold);
  CHECK(run_failed(r));

  const fs::path dir = run_dir(cfg, cfg.variants[0], 0);
  for (const char* f : {"meta.json", "iterations.log", "evals.log", "summary.json"}) {
    CHECK(fs::exists(dir / f));
  }
  const std::string summary = slurp(dir / "summary.json");
  CHECK(summary.find("\"diverged\": true") != std::string::npos);
  CHECK(summary.find("divergence") != std::string::npos);

  const RunRecord loaded = load_run_record(dir);
  CHECK(loaded.diverged);
  CHECK(final_return(loaded) == loaded.failure_threshold);
  fs::remove_all(cfg.out_dir);
}

TEST_CASE("replay_trace runs the controller without a learner") {
  const fs::path dir = fresh_dir("replay");
  const fs::path trace = dir / "trace.txt";
  {
    std::ofstream out(trace);
    out << "# burst then calm\n";
    for (int i = 0; i < 20; ++i) out << "5.0\n";
    out << "\n";
    for (int i = 0; i < 20; ++i) out << "0.0\n";
  }
  ControllerConfig cfg;
  const auto outputs = replay_trace(trace.string(),
                                    ControllerVariant::of(VariantKind::full_meta), cfg, 0.1);
  REQUIRE(outputs.size() == 40);
  // Burst: trust decays every step; calm: trust recovers every step.
  for (int i = 1; i < 20; ++i) {
    CHECK(outputs[i].tau <= outputs[i - 1].tau);
  }
  for (int i = 21; i < 40; ++i) {
    CHECK(outputs[i].tau >= outputs[i - 1].tau);
  }

  SUBCASE("empty trace gives empty output") {
    const fs::path empty = dir / "empty.txt";
    std::ofstream(empty) << "# nothing\n";
    CHECK(replay_trace(empty.string(), ControllerVariant::of(VariantKind::base), cfg, 0.1)
              .empty());
  }

  SUBCASE("malformed lines carry their line number") {
    const fs::path bad = dir / "bad.txt";
    std::ofstream(bad) << "1.0\n2.0\noops\n";
    try {
      replay_trace(bad.string(), ControllerVariant::of(VariantKind::base), cfg, 0.1);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("emit_report lists missing artifacts") {
  ExperimentConfig cfg = tiny_config("broken");
  run_experiment(cfg);
  const fs::path victim =
      run_dir(cfg, cfg.variants[0], 1) / "evals.log";
  fs::remove(victim);
  try {
    emit_report(experiment_dir(cfg));
    FAIL("expected ArtifactError");
  } catch (const ArtifactError& e) {
    CHECK(std::string(e.what()).find("evals.log") != std::string::npos);
  }
  fs::remove_all(cfg.out_dir);
}

TEST_CASE("dynamics chart has one point per iteration") {
  ExperimentConfig cfg = tiny_config("chart");
  const auto records = run_experiment(cfg);
  const fs::path svg_path =
      experiment_dir(cfg) / "plots" / "dynamics_full_meta_seed0.svg";
  REQUIRE(fs::exists(svg_path));
  const std::string svg = slurp(svg_path);
  // 4 iterations -> 4 circles per series, 3 series.
  std::size_t count = 0;
  for (std::size_t pos = svg.find("<circle"); pos != std::string::npos;
       pos = svg.find("<circle", pos + 1)) {
    ++count;
  }
  CHECK(count == 12);
  fs::remove_all(cfg.out_dir);
}
