#include <doctest.h>

#include <random>

#include "pacc/guidance.hpp"

using namespace pacc;

TEST_CASE("zone map hits the paper levels") {
  GuidanceParams p;
  CHECK(pitch_to_forward(deg2rad(5), p) == 0.0);
  CHECK(pitch_to_forward(deg2rad(15), p) == doctest::Approx(0.1));
  CHECK(pitch_to_forward(deg2rad(30), p) == doctest::Approx(0.2));
  CHECK(pitch_to_forward(deg2rad(-15), p) == doctest::Approx(-0.1));
  CHECK(pitch_to_forward(deg2rad(-30), p) == doctest::Approx(-0.2));

  CHECK(yaw_to_heading(0.0, p) == 0.0);
  CHECK(yaw_to_heading(deg2rad(-15), p) == doctest::Approx(-0.3));
  CHECK(yaw_to_heading(deg2rad(25), p) == doctest::Approx(0.4));
  CHECK(yaw_to_heading(deg2rad(15), p) == doctest::Approx(0.3));
}

TEST_CASE("zone map is odd and monotone about the bias") {
  GuidanceParams p;
  p.theta_bias = deg2rad(10);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng);
    CHECK(pitch_to_forward(p.theta_bias + x, p) ==
          doctest::Approx(-pitch_to_forward(p.theta_bias - x, p)));
  }
  double prev = 0;
  for (double x = 0; x < 0.8; x += 1e-3) {
    const double v = std::abs(pitch_to_forward(p.theta_bias + x, p));
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("rope-mode bias shifts the zone edges") {
  GuidanceParams p;
  p.theta_bias = deg2rad(10);
  CHECK(pitch_to_forward(deg2rad(10), p) == 0.0);
  CHECK(pitch_to_forward(deg2rad(0) - 1e-9, p) == doctest::Approx(-0.1));
  CHECK(pitch_to_forward(deg2rad(19.9), p) == 0.0);
  CHECK(pitch_to_forward(deg2rad(20.1), p) == doctest::Approx(0.1));
}

TEST_CASE("second-order filter: exact DC, no overshoot, settles on schedule") {
  const double dt = 0.004;
  SecondOrderFilter f(6.0, 1.0);
  double prev = 0.0;
  bool monotone = true;
  double y = 0.0;
  for (int i = 0; i < 4000; ++i) {
    y = f.step(0.1, dt);
    if (y < prev - 1e-12 || y > 0.1 + 1e-12) monotone = false;
    prev = y;
  }
  CHECK(monotone);
  CHECK(y == doctest::Approx(0.1).epsilon(1e-9));

  // critically damped: 95% after wt ~ 4.744
  SecondOrderFilter g(6.0, 1.0);
  const double t95 = 4.7439 / 6.0;
  const int n95 = static_cast<int>(t95 / dt);
  double v = 0.0;
  for (int i = 0; i <= n95; ++i) v = g.step(1.0, dt);
  CHECK(v == doctest::Approx(0.95).epsilon(0.02));

  SecondOrderFilter z(6.0, 1.0);
  for (int i = 0; i < 100; ++i) CHECK(z.step(0.0, dt) == 0.0);
}

TEST_CASE("filter output is bounded by the raw history for zeta >= 1") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> pick(-2, 2);
  const double levels[5] = {-0.2, -0.1, 0.0, 0.1, 0.2};
  SecondOrderFilter f(6.0, 1.0);
  double max_raw = 0.0;
  for (int i = 0; i < 5000; ++i) {
    const double raw = levels[pick(rng) + 2];
    max_raw = std::max(max_raw, std::abs(raw));
    const double y = f.step(raw, 0.004);
    CHECK(std::abs(y) <= max_raw + 1e-9);
  }
}

TEST_CASE("guidance hysteresis holds the zone near an edge") {
  GuidanceParams p;
  Guidance g(p);
  const double dt = 0.004;
  g.update(deg2rad(11.0), 0.0, dt);
  CHECK(g.command().v_forward_raw == doctest::Approx(0.1));
  // dipping less than the hysteresis below the edge keeps the level
  g.update(deg2rad(9.5), 0.0, dt);
  CHECK(g.command().v_forward_raw == doctest::Approx(0.1));
  g.update(deg2rad(8.9), 0.0, dt);
  CHECK(g.command().v_forward_raw == 0.0);
}

TEST_CASE("pendulum pitch sign convention") {
  // hanging straight down: zero; deflected toward arm forward: positive
  CHECK(pendulum_pitch(Vec3(0, 0, -1), Vec3::UnitY(), Vec3(0, 0, -1)) == doctest::Approx(0.0));
  CHECK(pendulum_pitch(Vec3(std::sin(0.3), 0, -std::cos(0.3)), Vec3::UnitY(), Vec3(0, 0, -1)) ==
        doctest::Approx(0.3));
  CHECK(pendulum_pitch(Vec3(-std::sin(0.3), 0, -std::cos(0.3)), Vec3::UnitY(), Vec3(0, 0, -1)) ==
        doctest::Approx(-0.3));
  // positive pitch rotation tips the link backward: negative deflection
  const Mat3 tilt = rot_y(0.2);
  CHECK(pendulum_pitch(tilt * Vec3(0, 0, -1), (tilt * Vec3::UnitY()).eval(), Vec3(0, 0, -1)) ==
        doctest::Approx(-0.2).epsilon(1e-9));
}
