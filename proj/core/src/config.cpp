#include "pacc/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace pacc {
namespace {

std::string fmt_double(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

double to_double(const std::string& value, const std::string& where) {
  const char* s = value.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0' || !std::isfinite(v)) {
    throw ParseError(where + ": invalid number '" + value + "'");
  }
  return v;
}

std::vector<double> to_list(const std::string& value, const std::string& where) {
  std::vector<double> out;
  std::istringstream ss(value);
  std::string tok;
  while (ss >> tok) out.push_back(to_double(tok, where));
  return out;
}

std::string list_to_string(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += fmt_double(v[i]);
  }
  return s;
}

struct Entry {
  std::string key;
  std::function<std::string()> get;
  std::function<void(const std::string&, const std::string&)> set;
};

class Schema {
 public:
  explicit Schema(ScenarioConfig* c) { build(*c); }

  const std::vector<Entry>& entries() const { return entries_; }

  const Entry* find(const std::string& key) const {
    for (const auto& e : entries_) {
      if (e.key == key) return &e;
    }
    return nullptr;
  }

 private:
  void add_double(const std::string& key, double* p, double lo, double hi,
                  bool strict_lo = false) {
    entries_.push_back(Entry{
        key, [p] { return fmt_double(*p); },
        [p, lo, hi, strict_lo, key](const std::string& v, const std::string& w) {
          const double x = to_double(v, w);
          if (x < lo || x > hi || (strict_lo && x <= lo)) {
            throw ValidationError(w + ": " + key + " = " + v + " out of range " +
                                  (strict_lo ? "(" : "[") + fmt_double(lo) + ", " +
                                  fmt_double(hi) + "]");
          }
          *p = x;
        }});
  }

  void add_int(const std::string& key, int* p, int lo, int hi) {
    entries_.push_back(Entry{
        key, [p] { return std::to_string(*p); },
        [p, lo, hi, key](const std::string& v, const std::string& w) {
          const double x = to_double(v, w);
          const int i = static_cast<int>(x);
          if (x != i || i < lo || i > hi) {
            throw ValidationError(w + ": " + key + " must be an integer in [" +
                                  std::to_string(lo) + ", " + std::to_string(hi) + "]");
          }
          *p = i;
        }});
  }

  void add_u64(const std::string& key, std::uint64_t* p) {
    entries_.push_back(Entry{
        key, [p] { return std::to_string(*p); },
        [p, key](const std::string& v, const std::string& w) {
          char* end = nullptr;
          const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
          if (end == v.c_str() || *end != '\0') {
            throw ParseError(w + ": invalid unsigned integer '" + v + "' for " + key);
          }
          *p = x;
        }});
  }

  void add_string(const std::string& key, std::string* p) {
    entries_.push_back(Entry{key, [p] { return *p; },
                             [p](const std::string& v, const std::string&) { *p = v; }});
  }

  template <typename Get, typename Set>
  void add_enum(const std::string& key, Get get, Set set, std::vector<std::string> allowed) {
    entries_.push_back(Entry{
        key, get, [set, allowed, key](const std::string& v, const std::string& w) {
          for (const auto& a : allowed) {
            if (a == v) {
              set(v);
              return;
            }
          }
          std::string opts;
          for (const auto& a : allowed) opts += (opts.empty() ? "" : "|") + a;
          throw ValidationError(w + ": " + key + " must be one of {" + opts + "}");
        }});
  }

  void add_list(const std::string& key, std::function<std::vector<double>()> get,
                std::function<void(const std::vector<double>&, const std::string&)> set) {
    entries_.push_back(Entry{
        key, [get] { return list_to_string(get()); },
        [set](const std::string& v, const std::string& w) { set(to_list(v, w), w); }});
  }

  void add_vec3(const std::string& key, Vec3* p) {
    add_list(
        key, [p] { return std::vector<double>{p->x(), p->y(), p->z()}; },
        [p, key](const std::vector<double>& v, const std::string& w) {
          if (v.size() != 3) throw ValidationError(w + ": " + key + " needs 3 values");
          *p = Vec3(v[0], v[1], v[2]);
        });
  }

  void add_robot(const std::string& pre, RobotConfig* r) {
    add_double(pre + ".start_x", &r->start_x, -1e3, 1e3);
    add_double(pre + ".start_y", &r->start_y, -1e3, 1e3);
    add_double(pre + ".start_yaw", &r->start_yaw, -M_PI, M_PI);
    add_double(pre + ".desired_height", &r->desired_height, 0.05, 1.0);
    add_vec3(pre + ".arm_mount", &r->arm_mount);
    add_double(pre + ".arm_mount_yaw", &r->arm_mount_yaw, -M_PI, M_PI);

    add_double(pre + ".arm.len_ab", &r->arm.len_ab, 0.0, 10.0, true);
    add_double(pre + ".arm.len_bc", &r->arm.len_bc, 0.0, 10.0, true);
    add_double(pre + ".arm.len_cd", &r->arm.len_cd, 0.0, 10.0, true);
    add_double(pre + ".arm.len_de", &r->arm.len_de, 0.0, 10.0, true);
    add_double(pre + ".arm.ang_abc", &r->arm.ang_abc, 0.0, M_PI);
    add_double(pre + ".arm.ang_bcd", &r->arm.ang_bcd, 0.0, M_PI);
    add_double(pre + ".arm.ang_cde", &r->arm.ang_cde, 0.0, M_PI);
    add_list(
        pre + ".arm.masses",
        [r] {
          return std::vector<double>{r->arm.link_masses[0], r->arm.link_masses[1],
                                     r->arm.link_masses[2], r->arm.link_masses[3]};
        },
        [r, pre](const std::vector<double>& v, const std::string& w) {
          if (v.size() != 4) throw ValidationError(w + ": " + pre + ".arm.masses needs 4 values");
          for (double m : v) {
            if (m < 0) throw ValidationError(w + ": link masses must be >= 0");
          }
          r->arm.link_masses = Vec4(v[0], v[1], v[2], v[3]);
        });
    add_vec3(pre + ".arm.stiffness", &r->arm.joint_stiffness);
    add_vec3(pre + ".arm.damping", &r->arm.joint_damping);
    add_vec3(pre + ".arm.equilibrium", &r->arm.spring_equilibrium);
    add_enum(
        pre + ".arm.mode",
        [r] {
          return r->arm.third_joint_mode == SpringMode::kAntagonistic
                     ? std::string("antagonistic")
                     : std::string("asymmetric");
        },
        [r](const std::string& v) {
          r->arm.third_joint_mode =
              v == "antagonistic" ? SpringMode::kAntagonistic : SpringMode::kAsymmetric;
        },
        {"antagonistic", "asymmetric"});
    add_double(pre + ".arm.pretorque", &r->arm.third_joint_pretorque, -10.0, 10.0);
    add_vec3(pre + ".arm.joint_lower", &r->arm.joint_lower);
    add_vec3(pre + ".arm.joint_upper", &r->arm.joint_upper);

    add_double(pre + ".guidance.theta1", &r->guidance.theta1, 0.0, M_PI, true);
    add_double(pre + ".guidance.theta2", &r->guidance.theta2, 0.0, M_PI, true);
    add_double(pre + ".guidance.psi1", &r->guidance.psi1, 0.0, M_PI, true);
    add_double(pre + ".guidance.psi2", &r->guidance.psi2, 0.0, M_PI, true);
    add_double(pre + ".guidance.v1", &r->guidance.v1, 0.0, 10.0, true);
    add_double(pre + ".guidance.v2", &r->guidance.v2, 0.0, 10.0, true);
    add_double(pre + ".guidance.psidot1", &r->guidance.psidot1, 0.0, 10.0, true);
    add_double(pre + ".guidance.psidot2", &r->guidance.psidot2, 0.0, 10.0, true);
    add_double(pre + ".guidance.theta_bias", &r->guidance.theta_bias, -M_PI, M_PI);
    add_double(pre + ".guidance.hysteresis", &r->guidance.hysteresis, 0.0, 0.2);
    add_double(pre + ".guidance.filter_omega", &r->guidance.filter_omega, 0.0, 100.0, true);
    add_double(pre + ".guidance.filter_zeta", &r->guidance.filter_zeta, 0.0, 10.0, true);

    add_double(pre + ".gait.step_frequency", &r->gait.step_frequency, 0.0, 10.0, true);
    add_double(pre + ".gait.duty_factor", &r->gait.duty_factor, 0.0, 1.0, true);
    add_list(
        pre + ".gait.phase_offsets",
        [r] {
          return std::vector<double>(r->gait.phase_offsets.begin(), r->gait.phase_offsets.end());
        },
        [r, pre](const std::vector<double>& v, const std::string& w) {
          if (v.size() != 4) {
            throw ValidationError(w + ": " + pre + ".gait.phase_offsets needs 4 values");
          }
          for (int i = 0; i < 4; ++i) r->gait.phase_offsets[i] = v[i];
        });
    add_list(
        pre + ".gait.home_positions",
        [r] {
          std::vector<double> v;
          for (const auto& p : r->gait.home_positions) {
            v.push_back(p.x());
            v.push_back(p.y());
            v.push_back(p.z());
          }
          return v;
        },
        [r, pre](const std::vector<double>& v, const std::string& w) {
          if (v.size() != 12) {
            throw ValidationError(w + ": " + pre + ".gait.home_positions needs 12 values");
          }
          for (int i = 0; i < 4; ++i) {
            r->gait.home_positions[i] = Vec3(v[3 * i], v[3 * i + 1], v[3 * i + 2]);
          }
        });
    add_double(pre + ".gait.step_height", &r->gait.step_height, 0.0, 1.0);

    add_int(pre + ".mpc.horizon", &r->mpc.horizon, 1, 100);
    add_double(pre + ".mpc.dt", &r->mpc.dt, 0.0, 1.0, true);
    add_double(pre + ".mpc.mass", &r->mpc.mass, 0.0, 1e3, true);
    add_vec3(pre + ".mpc.inertia", &r->mpc.inertia_diag);
    add_double(pre + ".mpc.mu", &r->mpc.mu, 0.0, 5.0, true);
    add_double(pre + ".mpc.f_max", &r->mpc.f_max, 0.0, 1e4, true);
    add_double(pre + ".mpc.zmp_margin", &r->mpc.zmp_margin, 0.0, 0.5);
    add_double(pre + ".mpc.zmp_margin_padding", &r->mpc.zmp_margin_padding, 0.0, 0.2);
    add_double(pre + ".mpc.w_orientation", &r->mpc.w_orientation, 0.0, 1e9);
    add_double(pre + ".mpc.w_position", &r->mpc.w_position, 0.0, 1e9);
    add_double(pre + ".mpc.w_position_z", &r->mpc.w_position_z, 0.0, 1e9);
    add_double(pre + ".mpc.w_omega", &r->mpc.w_omega, 0.0, 1e9);
    add_double(pre + ".mpc.w_velocity", &r->mpc.w_velocity, 0.0, 1e9);
    add_double(pre + ".mpc.w_feet", &r->mpc.w_feet, 0.0, 1e9);
    add_double(pre + ".mpc.w_disturbance", &r->mpc.w_disturbance, 0.0, 1e9);
    add_double(pre + ".mpc.w_force", &r->mpc.w_force, 0.0, 1e9);
    add_double(pre + ".mpc.w_foot_velocity", &r->mpc.w_foot_velocity, 0.0, 1e9);
    add_double(pre + ".mpc.slack_weight", &r->mpc.slack_weight, 0.0, 1e12, true);
  }

  void build(ScenarioConfig& c) {
    add_enum(
        "scenario.kind", [&c] { return to_string(c.kind); },
        [&c](const std::string& v) { c.kind = scenario_kind_from(v); },
        {"rr_rigid", "rr_rope", "hr_rigid", "custom"});
    add_double("run.duration", &c.run.duration, 0.0, 1e6);
    add_u64("run.seed", &c.run.seed);
    add_double("run.log_rate", &c.run.log_rate, 0.0, 1e4, true);
    add_string("run.out_dir", &c.run.out_dir);

    add_double("sim.dt_physics", &c.rates.dt_physics, 0.0, 2e-3, true);
    add_double("sim.guidance_rate", &c.rates.guidance_hz, 0.0, 1e4, true);
    add_double("sim.mpc_rate", &c.rates.mpc_hz, 0.0, 1e3, true);

    add_enum(
        "terrain.kind",
        [&c] {
          switch (c.terrain.kind) {
            case TerrainKind::kFlat: return std::string("flat");
            case TerrainKind::kStairs: return std::string("stairs");
            case TerrainKind::kHeightfield: return std::string("heightfield");
            default: return std::string("circuit");
          }
        },
        [&c](const std::string& v) {
          if (v == "flat") c.terrain.kind = TerrainKind::kFlat;
          else if (v == "stairs") c.terrain.kind = TerrainKind::kStairs;
          else if (v == "heightfield") c.terrain.kind = TerrainKind::kHeightfield;
          else c.terrain.kind = TerrainKind::kCircuit;
        },
        {"flat", "stairs", "heightfield", "circuit"});
    add_double("terrain.stairs.origin_x", &c.terrain.stairs.origin_x, -1e3, 1e3);
    add_double("terrain.stairs.depth", &c.terrain.stairs.depth, 0.0, 10.0, true);
    add_list(
        "terrain.stairs.risers", [&c] { return c.terrain.stairs.risers; },
        [&c](const std::vector<double>& v, const std::string&) { c.terrain.stairs.risers = v; });
    add_double("terrain.stairs.edge_smoothing", &c.terrain.stairs.edge_smoothing, 0.0, 0.5);
    add_double("terrain.field.origin_x", &c.terrain.field.origin_x, -1e3, 1e3);
    add_double("terrain.field.length", &c.terrain.field.length, 0.0, 1e3);
    add_double("terrain.field.width", &c.terrain.field.width, 0.0, 1e3, true);
    add_double("terrain.field.spacing", &c.terrain.field.spacing, 0.0, 10.0, true);
    add_double("terrain.field.amplitude", &c.terrain.field.amplitude, 0.0, 1.0);

    add_enum(
        "coupling.kind",
        [&c] {
          switch (c.coupling.kind) {
            case CouplingKind::kNone: return std::string("none");
            case CouplingKind::kRigidBar: return std::string("rigid_bar");
            default: return std::string("rope");
          }
        },
        [&c](const std::string& v) {
          if (v == "none") c.coupling.kind = CouplingKind::kNone;
          else if (v == "rigid_bar") c.coupling.kind = CouplingKind::kRigidBar;
          else c.coupling.kind = CouplingKind::kRope;
        },
        {"none", "rigid_bar", "rope"});
    add_double("coupling.payload_mass", &c.coupling.payload_mass, 0.0, 100.0);
    add_double("coupling.bar_length", &c.coupling.bar_length, 0.0, 10.0, true);
    add_double("coupling.bar_stiffness", &c.coupling.bar_stiffness, 0.0, 1e6, true);
    add_double("coupling.bar_damping", &c.coupling.bar_damping, 0.0, 1e4);
    add_double("coupling.rope_segment_length", &c.coupling.rope_segment_length, 0.0, 10.0, true);
    add_double("coupling.rope_stiffness", &c.coupling.rope_stiffness, 0.0, 1e6, true);
    add_double("coupling.rope_damping", &c.coupling.rope_damping, 0.0, 1e4);

    add_list(
        "path.waypoints", [&c] { return c.path.waypoints; },
        [&c](const std::vector<double>& v, const std::string& w) {
          if (v.size() % 2 != 0 || v.empty()) {
            throw ValidationError(w + ": path.waypoints needs an even number of values (x y ...)");
          }
          c.path.waypoints = v;
        });
    add_double("path.cruise_speed", &c.path.cruise_speed, 0.0, 5.0, true);
    add_double("path.accel", &c.path.accel, 0.0, 10.0, true);
    add_double("path.hand_height", &c.path.hand_height, 0.0, 2.0, true);
    add_double("path.hand_filter_omega", &c.path.hand_filter_omega, 0.0, 100.0, true);

    add_robot("leader", &c.leader);
    add_robot("follower", &c.follower);
  }

  std::vector<Entry> entries_;
};

void cross_validate(const ScenarioConfig& c) {
  if (!c.follower.guidance.valid() || !c.leader.guidance.valid()) {
    throw ValidationError("guidance zone parameters must satisfy 0 < edge1 < edge2 and 0 < level1 < level2");
  }
  if (!c.follower.gait.valid() || !c.leader.gait.valid()) {
    throw ValidationError("gait parameters out of range");
  }
  if (!c.follower.mpc.valid() || !c.leader.mpc.valid()) {
    throw ValidationError("mpc parameters out of range");
  }
  if (!c.follower.arm.valid() || !c.leader.arm.valid()) {
    throw ValidationError("arm parameters out of range");
  }
  if (!c.rates.valid()) {
    throw ValidationError("simulation rates out of range (dt_physics <= 2 ms)");
  }
}

struct RawKv {
  std::string key, value;
  int line;
};

std::vector<RawKv> tokenize(const std::string& text) {
  std::vector<RawKv> out;
  std::set<std::string> seen;
  std::istringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    RawKv kv{trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)), lineno};
    if (kv.key.empty() ||
        kv.key.find_first_not_of(
            "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789._") !=
            std::string::npos) {
      throw ParseError("line " + std::to_string(lineno) + ": invalid key '" + kv.key + "'");
    }
    if (kv.value.empty()) {
      throw ParseError("line " + std::to_string(lineno) + ": missing value for '" + kv.key + "'");
    }
    if (!seen.insert(kv.key).second) {
      throw ParseError("line " + std::to_string(lineno) + ": duplicate key '" + kv.key + "'");
    }
    out.push_back(kv);
  }
  return out;
}

}  // namespace

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kRrRigid: return "rr_rigid";
    case ScenarioKind::kRrRope: return "rr_rope";
    case ScenarioKind::kHrRigid: return "hr_rigid";
    default: return "custom";
  }
}

ScenarioKind scenario_kind_from(const std::string& name) {
  if (name == "rr_rigid") return ScenarioKind::kRrRigid;
  if (name == "rr_rope") return ScenarioKind::kRrRope;
  if (name == "hr_rigid") return ScenarioKind::kHrRigid;
  if (name == "custom") return ScenarioKind::kCustom;
  throw ValidationError("unknown scenario kind '" + name + "'");
}

ScenarioConfig default_config(ScenarioKind kind) {
  ScenarioConfig c;
  c.kind = kind;

  c.follower.start_x = -2.2;
  c.leader.arm_mount = Vec3(-0.30, 0.0, 0.05);
  c.leader.arm_mount_yaw = M_PI;

  c.terrain.kind = TerrainKind::kCircuit;
  c.terrain.stairs.origin_x = 2.0;
  c.terrain.stairs.depth = 0.55;
  c.terrain.stairs.risers = {0.16, 0.16, 0.13, -0.13, -0.16, -0.16};
  c.terrain.stairs.edge_smoothing = 0.02;
  c.terrain.field.origin_x = 5.3;
  c.terrain.field.length = 2.0;
  c.terrain.field.width = 4.0;
  c.terrain.field.spacing = 0.25;
  c.terrain.field.amplitude = 0.06;

  switch (kind) {
    case ScenarioKind::kRrRigid:
      c.coupling.kind = CouplingKind::kRigidBar;
      c.coupling.payload_mass = 7.0;
      c.run.duration = 95.0;
      break;
    case ScenarioKind::kRrRope:
      c.coupling.kind = CouplingKind::kRope;
      c.coupling.payload_mass = 2.0;
      c.follower.guidance.theta_bias = deg2rad(10.0);
      c.follower.arm.third_joint_mode = SpringMode::kAsymmetric;
      c.follower.arm.third_joint_pretorque = 0.5;
      c.run.duration = 95.0;
      break;
    case ScenarioKind::kHrRigid:
      c.coupling.kind = CouplingKind::kRigidBar;
      c.coupling.payload_mass = 7.0;
      c.run.duration = 95.0;
      break;
    case ScenarioKind::kCustom:
      c.terrain.kind = TerrainKind::kFlat;
      c.coupling.kind = CouplingKind::kNone;
      c.run.duration = 10.0;
      break;
  }

  // place the leader (or the human hand) so the coupling starts unloaded
  const double hook_fwd =
      c.follower.arm_mount.x() + forward_kinematics(c.follower.arm, Vec3::Zero()).p_e.x();
  double span = 1.0;
  if (c.coupling.kind == CouplingKind::kRigidBar) span = c.coupling.bar_length;
  if (c.coupling.kind == CouplingKind::kRope) span = 1.65 * c.coupling.rope_segment_length;

  const double follower_hook_x = c.follower.start_x + hook_fwd;
  if (kind == ScenarioKind::kHrRigid) {
    const double hand_x = follower_hook_x + span;
    c.path.waypoints = {hand_x, 0.0, 9.7, 0.0};
    c.leader.start_x = hand_x;  // unused, kept coherent for dumps
  } else {
    c.leader.start_x = follower_hook_x + span + hook_fwd;  // leader arm mirrors the follower's
    c.path.waypoints = {c.leader.start_x, 0.0, 9.7, 0.0};
  }
  if (kind == ScenarioKind::kCustom) {
    c.path.waypoints = {c.leader.start_x, 0.0};
  }
  return c;
}

ScenarioConfig parse_config(const std::string& text) {
  const auto raw = tokenize(text);
  ScenarioKind kind = ScenarioKind::kRrRigid;
  for (const auto& kv : raw) {
    if (kv.key == "scenario.kind") {
      kind = scenario_kind_from(kv.value);
    }
  }
  ScenarioConfig cfg = default_config(kind);
  Schema schema(&cfg);
  for (const auto& kv : raw) {
    const Entry* e = schema.find(kv.key);
    if (!e) {
      throw ParseError("line " + std::to_string(kv.line) + ": unknown key '" + kv.key + "'");
    }
    e->set(kv.value, "line " + std::to_string(kv.line));
  }
  cross_validate(cfg);
  return cfg;
}

ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const ScenarioConfig& config) {
  ScenarioConfig copy = config;
  Schema schema(&copy);
  std::string out;
  for (const auto& e : schema.entries()) {
    out += e.key + " = " + e.get() + "\n";
  }
  return out;
}

WorldParams make_world_params(const ScenarioConfig& config) {
  WorldParams p;
  p.rates = config.rates;
  p.terrain = config.terrain;
  p.terrain.field.seed = config.run.seed;
  p.coupling = config.coupling;
  p.leader = config.leader;
  p.follower = config.follower;
  p.human_leader = config.kind == ScenarioKind::kHrRigid;
  std::vector<Vec2> wps;
  for (size_t i = 0; i + 1 < config.path.waypoints.size(); i += 2) {
    wps.emplace_back(config.path.waypoints[i], config.path.waypoints[i + 1]);
  }
  p.leader_path = WaypointPath(wps, config.path.cruise_speed, config.path.accel);
  p.hand_height = config.path.hand_height;
  p.hand_filter_omega = config.path.hand_filter_omega;
  return p;
}

}  // namespace pacc
