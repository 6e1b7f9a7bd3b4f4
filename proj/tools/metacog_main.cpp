#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "metacog/config.hpp"
#include "metacog/errors.hpp"
#include "metacog/harness.hpp"

namespace {

using namespace metacog;

// Exit codes: 0 success, 1 config error, 2 runtime failure, 3 incomplete
// artifacts on report.
constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;
constexpr int kArtifactError = 3;

struct CommonOpts {
  std::string config_path;
  std::string profile = "desk";
  std::string out_dir;
  std::string seeds;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON config file");
  cmd->add_option("--profile", opts.profile, "built-in profile: desk or long")
      ->default_val("desk");
  cmd->add_option("--out", opts.out_dir, "output directory override");
  cmd->add_option("--seeds", opts.seeds, "seed count or comma-separated seed list");
  cmd->add_flag("--quiet", opts.quiet, "suppress progress output");
}

std::vector<int> parse_seeds(const std::string& text) {
  std::vector<int> seeds;
  if (text.find(',') == std::string::npos) {
    const long n = std::stol(text);
    if (n <= 0) {
      throw ConfigError("--seeds count must be positive");
    }
    for (long i = 0; i < n; ++i) {
      seeds.push_back(static_cast<int>(i));
    }
    return seeds;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string tok = text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!tok.empty()) {
      seeds.push_back(std::stoi(tok));
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (seeds.empty()) {
    throw ConfigError("--seeds list is empty");
  }
  return seeds;
}

ExperimentConfig build_config(const CommonOpts& opts) {
  ExperimentConfig cfg = profile_config(opts.profile);
  if (!opts.config_path.empty()) {
    cfg = load_config(opts.config_path, cfg);
  }
  if (!opts.out_dir.empty()) {
    cfg.out_dir = opts.out_dir;
  }
  if (!opts.seeds.empty()) {
    cfg.seeds = parse_seeds(opts.seeds);
  }
  if (opts.quiet) {
    cfg.quiet = true;
  }
  return cfg;
}

void print_warnings(const std::vector<std::string>& warnings, bool quiet) {
  if (quiet) return;
  for (const std::string& w : warnings) {
    std::cerr << "warning: " << w << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"meta-trust training stabilization toolkit"};
  app.require_subcommand(1);

  CommonOpts run_opts, ablate_opts, replay_opts, validate_opts;
  std::string trace_path, replay_variant = "full_meta", report_dir;

  CLI::App* run_cmd = app.add_subcommand("run", "train one variant over all seeds");
  add_common(run_cmd, run_opts);

  CLI::App* ablate_cmd =
      app.add_subcommand("ablate", "compare >= 2 variants with paired corruption");
  add_common(ablate_cmd, ablate_opts);

  CLI::App* replay_cmd =
      app.add_subcommand("replay", "feed a VPES trace through a controller variant");
  add_common(replay_cmd, replay_opts);
  replay_cmd->add_option("--trace", trace_path, "trace file: one VPES value per line")
      ->required();
  replay_cmd->add_option("--variant", replay_variant, "controller variant kind");

  CLI::App* report_cmd =
      app.add_subcommand("report", "rebuild comparison table, plots and digest");
  report_cmd->add_option("dir", report_dir, "experiment directory")->required();

  CLI::App* validate_cmd =
      app.add_subcommand("validate", "check a config and print its effective echo");
  add_common(validate_cmd, validate_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      ExperimentConfig cfg = build_config(run_opts);
      print_warnings(validate_config(cfg), cfg.quiet);
      run_experiment(cfg);
      if (!cfg.quiet) {
        std::cout << "artifacts: " << experiment_dir(cfg).string() << "\n";
      }
      return kOk;
    }
    if (ablate_cmd->parsed()) {
      ExperimentConfig cfg = build_config(ablate_opts);
      print_warnings(validate_config(cfg), cfg.quiet);
      AblationResult result = run_ablation(cfg);
      if (!cfg.quiet) {
        for (const MetricSummary& s : result.rows) {
          std::printf("%-24s final %12.4f std %10.4f cvar20 %12.4f late-fail %.2f\n",
                      s.variant.c_str(), s.mean_final_return, s.std_final_return,
                      s.cvar20, s.late_failure_rate);
        }
        std::printf("bootstrap rank stability: %.4f\n", result.rank_stability);
        std::cout << "artifacts: " << experiment_dir(cfg).string() << "\n";
      }
      return kOk;
    }
    if (replay_cmd->parsed()) {
      ExperimentConfig cfg = build_config(replay_opts);
      ControllerVariant variant = ControllerVariant::of(parse_variant_kind(replay_variant));
      const auto outputs =
          replay_trace(trace_path, variant, cfg.controller, cfg.base_lr);
      std::printf("iteration,vpes,baseline,trend,tau,scale,effective_lr\n");
      for (const ControllerOutput& o : outputs) {
        std::printf("%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", o.iteration, o.vpes,
                    o.baseline, o.trend, o.tau, o.scale, o.effective_lr);
      }
      return kOk;
    }
    if (report_cmd->parsed()) {
      emit_report(report_dir);
      return kOk;
    }
    if (validate_cmd->parsed()) {
      ExperimentConfig cfg = build_config(validate_opts);
      const auto warnings = validate_config(cfg);
      print_warnings(warnings, false);
      std::cout << echo_config(cfg).dump(2) << "\n";
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ArtifactError& e) {
    std::cerr << "artifact error: " << e.what() << "\n";
    return kArtifactError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}
