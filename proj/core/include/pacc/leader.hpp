#pragma once

#include <vector>

#include "pacc/math_utils.hpp"

namespace pacc {

// Piecewise-linear waypoint route traversed with a trapezoidal speed profile.
// Deterministic, pure in t.
class WaypointPath {
 public:
  WaypointPath() { set(std::vector<Vec2>{Vec2::Zero()}, 0.12, 0.2); }
  WaypointPath(std::vector<Vec2> waypoints, double cruise_speed, double accel) {
    set(std::move(waypoints), cruise_speed, accel);
  }

  void set(std::vector<Vec2> waypoints, double cruise_speed, double accel);

  struct Sample {
    Vec2 position = Vec2::Zero();
    Vec2 heading = Vec2::UnitX();
    double speed = 0.0;
    bool finished = true;
  };

  Sample sample(double t) const;
  double total_length() const { return total_; }
  double duration() const { return t_total_; }

 private:
  double arclength_at(double t) const;

  std::vector<Vec2> pts_;
  std::vector<double> cum_;
  double v_ = 0.12, a_ = 0.2;
  double v_peak_ = 0.0, t_ramp_ = 0.0, total_ = 0.0, t_total_ = 0.0;
};

}  // namespace pacc
