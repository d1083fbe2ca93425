#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "pacc/config.hpp"
#include "pacc/world.hpp"

namespace pacc {

// Per-step CSV schema: t, two robot blocks (leader first), payload block.
// Values are printed with 9 significant digits; identical runs produce
// byte-identical files. The solve_ms column is a deterministic solver-effort
// metric (QP iterations x nominal per-iteration cost), not wall time.
inline constexpr double kSolveCostMsPerIteration = 0.25;

std::vector<std::string> trace_column_names();

class TraceWriter {
 public:
  explicit TraceWriter(const std::string& path);
  void write_row(const std::vector<double>& values);
  void close();

 private:
  std::ofstream file_;
  size_t columns_;
};

std::vector<double> trace_row(const World& world);

struct TraceTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  int column(const std::string& name) const;  // -1 if absent
};

TraceTable read_trace_csv(const std::string& path);

struct OscillationStats {
  double mean = 0.0;
  double peak = 0.0;          // max |detrended|
  double period = 0.0;        // s, zero-crossing estimate; 0 if undetermined
  double peak_frequency = 0.0;  // Hz of the dominant spectral line
  double peak_amplitude = 0.0;  // spectral amplitude at the dominant line
};

// Zero-crossing and band-limited DFT analysis of a uniformly sampled signal.
OscillationStats analyze_oscillation(const std::vector<double>& samples, double sample_rate);

struct RobotSummary {
  double min_zmp_margin = 0.0;
  double mean_zmp_margin = 0.0;
  double velocity_rmse = 0.0;
  OscillationStats longitudinal_force;
  double mean_slack = 0.0;
  double mean_solve_cost = 0.0;
  double max_solve_cost = 0.0;
};

struct RunSummary {
  std::array<RobotSummary, 2> robots;  // [leader, follower]
  double payload_min_clearance = 0.0;
  bool completed = false;
  double duration = 0.0;
};

// Pure function of the trace; the steady segment skips the leading 20% and
// trailing 5% of the rows.
RunSummary summarize_trace(const TraceTable& trace);

std::string format_summary(const RunSummary& summary);

struct RunResult {
  RunSummary summary;
  bool leader_finished = false;
  double wall_seconds = 0.0;
  std::string trace_path;
  std::string summary_path;
  std::string error;
};

// Executes the scenario, writes <out_dir>/trace.csv and <out_dir>/summary.txt,
// then recomputes the summary from the written trace.
RunResult run_scenario(const ScenarioConfig& config);

}  // namespace pacc
