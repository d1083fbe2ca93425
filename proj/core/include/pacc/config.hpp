#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pacc/world.hpp"

namespace pacc {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ScenarioKind { kRrRigid, kRrRope, kHrRigid, kCustom };

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from(const std::string& name);

struct RunSettings {
  double duration = 90.0;   // s
  std::uint64_t seed = 1;
  double log_rate = 100.0;  // Hz
  std::string out_dir = "out";
};

struct PathSettings {
  std::vector<double> waypoints;  // flat x y pairs, world frame
  double cruise_speed = 0.12;     // m/s
  double accel = 0.2;             // m/s^2
  double hand_height = 0.45;      // m, human-leader carry height
  double hand_filter_omega = 4.0; // rad/s
};

// Everything needed to reproduce a run. All values SI (m, s, rad, kg, Hz).
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::kRrRigid;
  RunSettings run;
  SimRates rates;
  Terrain terrain;
  CouplingParams coupling;
  PathSettings path;
  RobotConfig leader;
  RobotConfig follower;
};

// Fully-resolved defaults for a scenario kind (robot placement included).
ScenarioConfig default_config(ScenarioKind kind);

// Line-oriented `dotted.key = value` text. Unknown keys and range violations
// are rejected with the offending line number.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig parse_config_file(const std::string& path);

// Emits every key; parse(dump(c)) reproduces c exactly.
std::string dump_config(const ScenarioConfig& config);

WorldParams make_world_params(const ScenarioConfig& config);

}  // namespace pacc
