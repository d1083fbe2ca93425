#include "pacc/leader.hpp"

#include <algorithm>
#include <cmath>

namespace pacc {

void WaypointPath::set(std::vector<Vec2> waypoints, double cruise_speed, double accel) {
  pts_ = std::move(waypoints);
  if (pts_.empty()) pts_.push_back(Vec2::Zero());
  v_ = std::max(1e-6, cruise_speed);
  a_ = std::max(1e-6, accel);
  cum_.assign(pts_.size(), 0.0);
  for (size_t i = 1; i < pts_.size(); ++i) {
    cum_[i] = cum_[i - 1] + (pts_[i] - pts_[i - 1]).norm();
  }
  total_ = cum_.back();
  const double d_ramp = v_ * v_ / (2.0 * a_);
  if (total_ >= 2.0 * d_ramp) {
    v_peak_ = v_;
    t_ramp_ = v_ / a_;
    t_total_ = 2.0 * t_ramp_ + (total_ - 2.0 * d_ramp) / v_;
  } else {
    v_peak_ = std::sqrt(a_ * total_);
    t_ramp_ = v_peak_ / a_;
    t_total_ = 2.0 * t_ramp_;
  }
}

double WaypointPath::arclength_at(double t) const {
  if (total_ <= 0.0 || t <= 0.0) return 0.0;
  if (t >= t_total_) return total_;
  if (t < t_ramp_) return 0.5 * a_ * t * t;
  const double d_ramp = 0.5 * a_ * t_ramp_ * t_ramp_;
  if (t < t_total_ - t_ramp_) return d_ramp + v_peak_ * (t - t_ramp_);
  const double td = t_total_ - t;
  return total_ - 0.5 * a_ * td * td;
}

WaypointPath::Sample WaypointPath::sample(double t) const {
  Sample s;
  s.position = pts_.front();
  if (total_ <= 0.0) return s;

  const double arc = arclength_at(t);
  size_t seg = 1;
  while (seg + 1 < pts_.size() && cum_[seg] < arc) ++seg;
  const double seg_len = cum_[seg] - cum_[seg - 1];
  const Vec2 dir = seg_len > 0 ? Vec2((pts_[seg] - pts_[seg - 1]) / seg_len) : Vec2::UnitX();
  s.position = pts_[seg - 1] + dir * (arc - cum_[seg - 1]);
  s.heading = dir;
  s.finished = t >= t_total_;
  if (!s.finished) {
    if (t < t_ramp_) s.speed = a_ * t;
    else if (t < t_total_ - t_ramp_) s.speed = v_peak_;
    else s.speed = a_ * (t_total_ - t);
  }
  return s;
}

}  // namespace pacc
