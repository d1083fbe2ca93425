#include "pacc/trace.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

namespace pacc {
namespace {

std::string fmt_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void robot_block_names(const std::string& pre, std::vector<std::string>* names) {
  const char* base[] = {"r_x", "r_y", "r_z", "roll", "pitch", "yaw", "v_x", "v_y", "v_z"};
  for (const char* b : base) names->push_back(pre + b);
  names->push_back(pre + "v_cmd");
  names->push_back(pre + "yawrate_cmd");
  for (int i = 1; i <= 3; ++i) names->push_back(pre + "qa_" + std::to_string(i));
  names->push_back(pre + "fee_x");
  names->push_back(pre + "fee_y");
  names->push_back(pre + "fee_z");
  names->push_back(pre + "tau_x");
  names->push_back(pre + "tau_y");
  names->push_back(pre + "tau_z");
  names->push_back(pre + "zmp_x");
  names->push_back(pre + "zmp_y");
  names->push_back(pre + "zmp_margin");
  names->push_back(pre + "slack");
  names->push_back(pre + "solve_ms");
  const char* legs[] = {"c_lf", "c_rf", "c_lh", "c_rh"};
  for (const char* l : legs) names->push_back(pre + l);
}

void append_robot_block(const World& world, int idx, std::vector<double>* row) {
  const RobotRuntime& r = world.robot(idx);
  const World::ZmpDiag z = world.zmp_diag(idx);
  for (int i = 0; i < 3; ++i) row->push_back(r.state.r[i]);
  for (int i = 0; i < 3; ++i) row->push_back(r.state.euler[i]);
  for (int i = 0; i < 3; ++i) row->push_back(r.state.rdot[i]);
  row->push_back(r.command.v_forward_filtered);
  row->push_back(r.command.yaw_rate_filtered);
  for (int i = 0; i < 3; ++i) row->push_back(r.arm.q[i]);
  for (int i = 0; i < 3; ++i) row->push_back(r.f_ee_arm[i]);
  for (int i = 0; i < 3; ++i) row->push_back(r.wrench.tau_ext[i]);
  row->push_back(z.zmp.x());
  row->push_back(z.zmp.y());
  row->push_back(z.margin);
  row->push_back(r.has_mpc ? r.last_mpc.slack_max : 0.0);
  row->push_back(r.has_mpc ? r.last_mpc.qp_iterations * kSolveCostMsPerIteration : 0.0);
  for (int leg = 0; leg < kNumLegs; ++leg) row->push_back(r.stance[leg] ? 1.0 : 0.0);
}

void append_hand_block(const World& world, std::vector<double>* row) {
  const Vec3 p = world.hand_position();
  for (int i = 0; i < 3; ++i) row->push_back(p[i]);
  for (int i = 0; i < 3; ++i) row->push_back(0.0);  // orientation n/a
  for (int i = 0; i < 3; ++i) row->push_back(0.0);  // velocity logged as zero
  for (int i = 0; i < 17; ++i) row->push_back(0.0);
  for (int i = 0; i < 4; ++i) row->push_back(1.0);  // "contact" placeholder
}

}  // namespace

std::vector<std::string> trace_column_names() {
  std::vector<std::string> names{"t"};
  robot_block_names("l_", &names);
  robot_block_names("f_", &names);
  names.push_back("p_x");
  names.push_back("p_y");
  names.push_back("p_z");
  names.push_back("clearance");
  return names;
}

TraceWriter::TraceWriter(const std::string& path) : file_(path) {
  if (!file_) throw std::runtime_error("cannot open trace file '" + path + "'");
  const auto names = trace_column_names();
  columns_ = names.size();
  for (size_t i = 0; i < names.size(); ++i) {
    if (i) file_ << ',';
    file_ << names[i];
  }
  file_ << '\n';
}

void TraceWriter::write_row(const std::vector<double>& values) {
  if (values.size() != columns_) throw std::runtime_error("trace row width mismatch");
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) file_ << ',';
    file_ << fmt_value(values[i]);
  }
  file_ << '\n';
  if (!file_) throw std::runtime_error("trace write failed");
}

void TraceWriter::close() {
  if (file_.is_open()) {
    file_.flush();
    file_.close();
  }
}

std::vector<double> trace_row(const World& world) {
  std::vector<double> row;
  row.reserve(63);
  row.push_back(world.time());
  if (world.num_robots() == 2) {
    append_robot_block(world, 0, &row);
    append_robot_block(world, 1, &row);
  } else {
    append_hand_block(world, &row);
    append_robot_block(world, 0, &row);
  }
  const Vec3 p = world.payload_position();
  for (int i = 0; i < 3; ++i) row.push_back(p[i]);
  row.push_back(world.payload_clearance());
  return row;
}

int TraceTable::column(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

TraceTable read_trace_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open trace '" + path + "'");
  TraceTable t;
  std::string line;
  if (!std::getline(f, line)) return t;
  std::stringstream header(line);
  std::string tok;
  while (std::getline(header, tok, ',')) t.columns.push_back(tok);
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(t.columns.size());
    std::stringstream ss(line);
    while (std::getline(ss, tok, ',')) row.push_back(std::strtod(tok.c_str(), nullptr));
    t.rows.push_back(std::move(row));
  }
  return t;
}

OscillationStats analyze_oscillation(const std::vector<double>& samples, double sample_rate) {
  OscillationStats out;
  const int n = static_cast<int>(samples.size());
  if (n < 16 || sample_rate <= 0.0) return out;

  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= n;
  out.mean = mean;

  // moving-average detrend, 2.5 s centered window
  const int half = std::max(1, static_cast<int>(std::lround(1.25 * sample_rate)));
  std::vector<double> prefix(n + 1, 0.0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + samples[i];
  std::vector<double> detr(n);
  for (int i = 0; i < n; ++i) {
    const int a = std::max(0, i - half);
    const int b = std::min(n - 1, i + half);
    const double local = (prefix[b + 1] - prefix[a]) / (b - a + 1);
    detr[i] = samples[i] - local;
  }

  double sq = 0.0;
  for (double v : detr) {
    out.peak = std::max(out.peak, std::abs(v));
    sq += v * v;
  }
  const double sigma = std::sqrt(sq / n);

  // Schmitt-trigger upward crossings
  const double thr = 0.2 * sigma;
  int state = 0;
  std::vector<double> up_times;
  for (int i = 0; i < n; ++i) {
    if (detr[i] > thr) {
      if (state == -1) up_times.push_back(i / sample_rate);
      state = 1;
    } else if (detr[i] < -thr) {
      state = -1;
    }
  }
  if (up_times.size() >= 3) {
    double acc = 0.0;
    for (size_t i = 1; i < up_times.size(); ++i) acc += up_times[i] - up_times[i - 1];
    out.period = acc / (up_times.size() - 1);
  }

  // band-limited DFT with a Hann window
  double best_amp = 0.0, best_freq = 0.0;
  std::vector<double> windowed(n);
  double wsum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / (n - 1));
    windowed[i] = detr[i] * w;
    wsum += w;
  }
  for (double f = 0.4; f <= 2.5 + 1e-9; f += 0.01) {
    double re = 0.0, im = 0.0;
    const double k = 2.0 * M_PI * f / sample_rate;
    for (int i = 0; i < n; ++i) {
      re += windowed[i] * std::cos(k * i);
      im -= windowed[i] * std::sin(k * i);
    }
    const double amp = 2.0 * std::sqrt(re * re + im * im) / wsum;
    if (amp > best_amp) {
      best_amp = amp;
      best_freq = f;
    }
  }
  out.peak_amplitude = best_amp;
  out.peak_frequency = best_freq;
  return out;
}

RunSummary summarize_trace(const TraceTable& trace) {
  RunSummary s;
  const size_t n = trace.rows.size();
  s.completed = true;
  for (const auto& row : trace.rows) {
    for (double v : row) {
      if (!std::isfinite(v)) s.completed = false;
    }
  }
  if (n == 0) return s;
  s.duration = trace.rows.back()[0];

  const double sample_rate =
      n >= 2 ? 1.0 / (trace.rows[1][0] - trace.rows[0][0]) : 0.0;
  const size_t steady_begin = static_cast<size_t>(0.2 * n);
  const size_t steady_end = std::max(steady_begin, static_cast<size_t>(0.95 * n));

  const std::string prefixes[2] = {"l_", "f_"};
  for (int rb = 0; rb < 2; ++rb) {
    RobotSummary& r = s.robots[rb];
    const std::string& pre = prefixes[rb];
    const int c_margin = trace.column(pre + "zmp_margin");
    const int c_vcmd = trace.column(pre + "v_cmd");
    const int c_vx = trace.column(pre + "v_x");
    const int c_vy = trace.column(pre + "v_y");
    const int c_yaw = trace.column(pre + "yaw");
    const int c_fee = trace.column(pre + "fee_x");
    const int c_slack = trace.column(pre + "slack");
    const int c_solve = trace.column(pre + "solve_ms");
    if (c_margin < 0) continue;

    double margin_min = std::numeric_limits<double>::infinity();
    double margin_sum = 0.0, err_sq = 0.0, slack_sum = 0.0, solve_sum = 0.0, solve_max = 0.0;
    for (const auto& row : trace.rows) {
      margin_min = std::min(margin_min, row[c_margin]);
      margin_sum += row[c_margin];
      const double fwd =
          row[c_vx] * std::cos(row[c_yaw]) + row[c_vy] * std::sin(row[c_yaw]);
      const double e = fwd - row[c_vcmd];
      err_sq += e * e;
      slack_sum += row[c_slack];
      solve_sum += row[c_solve];
      solve_max = std::max(solve_max, row[c_solve]);
    }
    r.min_zmp_margin = margin_min;
    r.mean_zmp_margin = margin_sum / n;
    r.velocity_rmse = std::sqrt(err_sq / n);
    r.mean_slack = slack_sum / n;
    r.mean_solve_cost = solve_sum / n;
    r.max_solve_cost = solve_max;

    std::vector<double> force;
    for (size_t i = steady_begin; i < steady_end; ++i) force.push_back(trace.rows[i][c_fee]);
    r.longitudinal_force = analyze_oscillation(force, sample_rate);
  }

  const int c_clear = trace.column("clearance");
  double clear_min = std::numeric_limits<double>::infinity();
  for (const auto& row : trace.rows) clear_min = std::min(clear_min, row[c_clear]);
  s.payload_min_clearance = clear_min;
  return s;
}

std::string format_summary(const RunSummary& summary) {
  std::ostringstream os;
  auto put = [&os](const std::string& key, double v) {
    os << key << " = " << fmt_value(v) << "\n";
  };
  put("duration", summary.duration);
  os << "completed = " << (summary.completed ? 1 : 0) << "\n";
  put("payload.min_clearance", summary.payload_min_clearance);
  const std::string pre[2] = {"leader.", "follower."};
  for (int i = 0; i < 2; ++i) {
    const RobotSummary& r = summary.robots[i];
    put(pre[i] + "min_zmp_margin", r.min_zmp_margin);
    put(pre[i] + "mean_zmp_margin", r.mean_zmp_margin);
    put(pre[i] + "velocity_rmse", r.velocity_rmse);
    put(pre[i] + "force_mean", r.longitudinal_force.mean);
    put(pre[i] + "force_peak", r.longitudinal_force.peak);
    put(pre[i] + "force_period", r.longitudinal_force.period);
    put(pre[i] + "force_peak_frequency", r.longitudinal_force.peak_frequency);
    put(pre[i] + "force_peak_amplitude", r.longitudinal_force.peak_amplitude);
    put(pre[i] + "mean_slack", r.mean_slack);
    put(pre[i] + "mean_solve_cost_ms", r.mean_solve_cost);
    put(pre[i] + "max_solve_cost_ms", r.max_solve_cost);
  }
  return os.str();
}

RunResult run_scenario(const ScenarioConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult out;

  WorldParams wp = make_world_params(config);
  World world(wp);

  std::filesystem::create_directories(config.run.out_dir);
  out.trace_path = config.run.out_dir + "/trace.csv";
  out.summary_path = config.run.out_dir + "/summary.txt";

  const double dt = config.rates.dt_physics;
  const long n_total = std::lround(config.run.duration / dt);
  const long stride = std::max<long>(1, std::lround(1.0 / (dt * config.run.log_rate)));

  bool diverged = false;
  {
    TraceWriter writer(out.trace_path);
    try {
      for (long i = 0; i < n_total; ++i) {
        if (i % stride == 0) writer.write_row(trace_row(world));
        world.step();
      }
    } catch (const NumericalDivergence& e) {
      diverged = true;
      out.error = e.what();
    }
    writer.close();
  }

  out.leader_finished = world.leader_finished();
  out.summary = summarize_trace(read_trace_csv(out.trace_path));
  out.summary.completed = out.summary.completed && !diverged;

  std::ofstream sf(out.summary_path);
  sf << format_summary(out.summary);
  sf.close();

  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace pacc
