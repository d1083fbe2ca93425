#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pacc/config.hpp"
#include "pacc/trace.hpp"

namespace {

int cmd_run(const std::string& config_path, double duration, long seed, const std::string& out_dir,
            double log_rate) {
  pacc::ScenarioConfig cfg;
  try {
    cfg = config_path.empty() ? pacc::default_config(pacc::ScenarioKind::kRrRigid)
                              : pacc::parse_config_file(config_path);
    if (duration >= 0.0) cfg.run.duration = duration;
    if (seed >= 0) cfg.run.seed = static_cast<std::uint64_t>(seed);
    if (!out_dir.empty()) cfg.run.out_dir = out_dir;
    if (log_rate > 0.0) cfg.run.log_rate = log_rate;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    const pacc::RunResult res = pacc::run_scenario(cfg);
    std::cout << pacc::format_summary(res.summary);
    std::cout << "leader_finished = " << (res.leader_finished ? 1 : 0) << "\n";
    std::cout << "wall_seconds = " << res.wall_seconds << "\n";
    std::cout << "trace = " << res.trace_path << "\n";
    if (!res.error.empty()) std::cerr << "run aborted: " << res.error << "\n";
    return res.summary.completed ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 1;
  }
}

int cmd_dump_defaults(const std::string& kind) {
  try {
    std::cout << pacc::dump_config(pacc::default_config(pacc::scenario_kind_from(kind)));
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_replay_summary(const std::string& trace_path) {
  try {
    const pacc::TraceTable t = pacc::read_trace_csv(trace_path);
    std::cout << pacc::format_summary(pacc::summarize_trace(t));
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collaborative-carrying quadruped simulation"};
  app.require_subcommand(1);

  std::string config_path, out_dir, kind = "rr_rigid", trace_path;
  double duration = -1.0, log_rate = -1.0;
  long seed = -1;

  auto* run = app.add_subcommand("run", "Run a scenario from a config file");
  run->add_option("config", config_path, "Scenario config file (defaults to rr_rigid)");
  run->add_option("--duration", duration, "Override run duration [s]");
  run->add_option("--seed", seed, "Override RNG seed");
  run->add_option("--out-dir", out_dir, "Override output directory");
  run->add_option("--log-rate", log_rate, "Override trace log rate [Hz]");

  auto* dump = app.add_subcommand("dump-defaults", "Print the full default config for a kind");
  dump->add_option("kind", kind, "rr_rigid | rr_rope | hr_rigid | custom");

  auto* replay = app.add_subcommand("replay-summary", "Recompute the summary from a trace CSV");
  replay->add_option("trace", trace_path, "trace.csv path")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(config_path, duration, seed, out_dir, log_rate);
  if (dump->parsed()) return cmd_dump_defaults(kind);
  return cmd_replay_summary(trace_path);
}
