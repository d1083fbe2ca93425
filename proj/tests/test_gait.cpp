#include <doctest.h>

#include <random>

#include "pacc/gait.hpp"
#include "pacc/mpc.hpp"

using namespace pacc;

TEST_CASE("crawl schedule: one swing leg at a time, never fewer than 3 in stance") {
  GaitSchedule g;
  for (double t = 0.0; t < 4.0; t += 1e-3) {
    const auto flags = g.contact_flags(t);
    int stance = 0;
    for (bool f : flags) stance += f ? 1 : 0;
    CHECK(stance >= 3);
  }
  // periodicity at f_step = 0.5 Hz
  for (double t = 0.0; t < 2.0; t += 7e-3) {
    CHECK(g.contact_flags(t) == g.contact_flags(t + 2.0));
  }
  // swing order LH -> LF -> RH -> RF
  std::vector<int> order;
  std::array<bool, 4> prev = g.contact_flags(0.0);
  for (double t = 0.0; t < 2.0; t += 1e-3) {
    const auto f = g.contact_flags(t);
    for (int leg = 0; leg < 4; ++leg) {
      if (prev[leg] && !f[leg]) order.push_back(leg);
    }
    prev = f;
  }
  REQUIRE(order.size() == 4);
  // cyclic LH, LF, RH, RF
  const int start = static_cast<int>(std::find(order.begin(), order.end(), kLH) - order.begin());
  CHECK(order[start % 4] == kLH);
  CHECK(order[(start + 1) % 4] == kLF);
  CHECK(order[(start + 2) % 4] == kRH);
  CHECK(order[(start + 3) % 4] == kRF);
}

TEST_CASE("full duty factor keeps every leg in stance") {
  GaitParams p;
  p.duty_factor = 1.0;
  GaitSchedule g(p);
  for (double t = 0.0; t < 3.0; t += 0.01) {
    for (bool f : g.contact_flags(t)) CHECK(f);
  }
}

TEST_CASE("horizon contact sequence matches pointwise queries") {
  GaitSchedule g;
  const auto seq = g.contact_sequence(0.37, 15, 0.04);
  for (int k = 0; k < 15; ++k) {
    const auto flags = g.contact_flags(0.37 + k * 0.04);
    for (int leg = 0; leg < 4; ++leg) {
      CHECK(seq(leg, k) == (flags[leg] ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("nominal foothold xy: velocity offset and force correction") {
  GaitParams p;
  const Vec3 no_force = Vec3::Zero();
  const Vec3 p_ee(0.5, 0.0, 0.4);

  const Vec2 rest = nominal_foothold_xy(kLF, Vec2::Zero(), no_force, p_ee, 21.0, p);
  CHECK((rest - Vec2(0.24, 0.15)).norm() < 1e-12);

  const Vec2 moving = nominal_foothold_xy(kLF, Vec2(0.1, 0.0), no_force, p_ee, 21.0, p);
  CHECK(moving.x() == doctest::Approx(0.24 + 0.08));  // 0.5 * 1.6 s * 0.1 m/s

  // linearity in the applied force, zero at zero
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-20, 20);
  for (int i = 0; i < 50; ++i) {
    const Vec3 f(u(rng), u(rng), u(rng));
    const Vec2 d1 = foothold_force_correction(f, p_ee, 21.0);
    const Vec2 d2 = foothold_force_correction(2.0 * f, p_ee, 21.0);
    // denominator changes with f_z, so compare against the explicit formula
    const double den1 = 21.0 * kGravity - f.z();
    CHECK((d1 * den1 -
           Vec2(f.x() * p_ee.z() - f.z() * p_ee.x(), f.y() * p_ee.z() - f.z() * p_ee.y()))
              .norm() < 1e-9);
    (void)d2;
  }
  CHECK(foothold_force_correction(Vec3::Zero(), p_ee, 21.0).norm() == 0.0);
  CHECK_THROWS_AS(foothold_force_correction(Vec3(0, 0, 21.0 * kGravity + 1.0), p_ee, 21.0),
                  DegenerateLoad);
}

TEST_CASE("force correction equals the static zmp shift") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 200; ++i) {
    const Vec3 r(u(rng), u(rng), 0.3 + 0.2 * std::abs(u(rng)));
    const Vec3 p_ee_w = r + Vec3(0.4 * u(rng), 0.4 * u(rng), 0.1 * u(rng));
    const Vec3 f(30 * u(rng), 30 * u(rng), 40 * u(rng));
    const Vec3 p_ee_h(p_ee_w.x() - r.x(), p_ee_w.y() - r.y(), p_ee_w.z());  // ground-ref z
    const Vec2 delta = foothold_force_correction(f, p_ee_h, 21.0);
    const Vec2 shift =
        zmp_point(r, Vec3::Zero(), p_ee_w, f, 21.0, kGravity, 0.0) - Vec2(r.head<2>());
    CHECK((delta - shift).norm() < 1e-9);
  }
}

TEST_CASE("foothold z follows the inclination-projected velocity") {
  GaitParams p;
  CHECK(foothold_z(0.1, 0.0, p) == doctest::Approx(0.1));
  CHECK(foothold_z(0.0, 0.05, p) == doctest::Approx(-0.08));  // 1.6 s stance
}

TEST_CASE("world foothold composes rotation, com and swing-time advance") {
  const Vec3 p_h(0.2, 0.1, -0.35);
  CHECK((world_foothold(p_h, Vec3::Zero(), Mat3::Identity(), Vec3::Zero(), 0.0) - p_h).norm() <
        1e-12);
  const Vec3 advanced =
      world_foothold(p_h, Vec3::Zero(), Mat3::Identity(), Vec3(0.1, 0, 0), 0.4);
  CHECK(advanced.x() == doctest::Approx(p_h.x() + 0.04));
  const Vec3 rotated = world_foothold(p_h, Vec3(1, 2, 0), rot_z(M_PI / 2), Vec3::Zero(), 0.0);
  CHECK(rotated.x() == doctest::Approx(1.0 - 0.1));
  CHECK(rotated.y() == doctest::Approx(2.0 + 0.2));
}

TEST_CASE("swing trajectory boundary conditions and apex") {
  const Vec3 a(0.1, 0.2, 0.0), b(0.3, 0.25, 0.05);
  CHECK((swing_trajectory(a, b, 0.0, 0.08) - a).norm() == 0.0);
  CHECK((swing_trajectory(a, b, 1.0, 0.08) - b).norm() < 1e-15);
  CHECK(swing_trajectory(a, Vec3(0.3, 0.2, 0.0), 0.5, 0.08).z() == doctest::Approx(0.08));
  CHECK(swing_trajectory(a, b, 0.5, 0.08).z() == doctest::Approx(b.z() + 0.08));

  // zero boundary velocity, C1 continuity
  const double h = 1e-6;
  CHECK((swing_trajectory(a, b, h, 0.08) - a).norm() / h < 1e-3);
  CHECK((swing_trajectory(a, b, 1.0 - h, 0.08) - b).norm() / h < 1e-3);
  double max_z = -1;
  Vec3 prev = a;
  for (double ph = 0.0; ph <= 1.0; ph += 1e-3) {
    const Vec3 p = swing_trajectory(a, b, ph, 0.08);
    max_z = std::max(max_z, p.z());
    CHECK((p - prev).norm() < 2e-3);  // continuous
    prev = p;
  }
  CHECK(max_z == doctest::Approx(b.z() + 0.08));
}

TEST_CASE("stance support polygon has positive area through the crawl cycle") {
  GaitParams gp;
  GaitSchedule g(gp);
  std::array<Vec3, 4> feet;
  for (int leg = 0; leg < 4; ++leg) feet[leg] = gp.home_positions[leg];
  for (double t = 0.0; t < 2.0; t += 0.01) {
    std::array<bool, 4> stance = g.contact_flags(t);
    const SupportPolygon poly = support_polygon(feet, stance, 0.0);
    double area = 0.0;
    for (size_t i = 0; i < poly.vertices.size(); ++i) {
      const Vec2& p1 = poly.vertices[i];
      const Vec2& p2 = poly.vertices[(i + 1) % poly.vertices.size()];
      area += 0.5 * (p1.x() * p2.y() - p2.x() * p1.y());
    }
    CHECK(area > 0.01);
  }
}

TEST_CASE("terrain plane fit recovers a sloped plane") {
  TerrainPlaneFit fit;
  std::array<Vec3, 4> pts;
  auto zfun = [](double x, double y) { return 0.3 * x - 0.1 * y + 0.05; };
  pts[0] = Vec3(0.2, 0.15, zfun(0.2, 0.15));
  pts[1] = Vec3(0.2, -0.15, zfun(0.2, -0.15));
  pts[2] = Vec3(-0.2, 0.15, zfun(-0.2, 0.15));
  pts[3] = Vec3(-0.2, -0.15, zfun(-0.2, -0.15));
  fit.reset(pts);
  CHECK(fit.gradient().x() == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(fit.gradient().y() == doctest::Approx(-0.1).epsilon(1e-9));
  CHECK(fit.height_at(Vec2(1.0, 1.0)) == doctest::Approx(zfun(1, 1)).epsilon(1e-9));

  fit.add_touchdown(0, Vec3(0.4, 0.15, zfun(0.4, 0.15)));
  CHECK(fit.gradient().x() == doctest::Approx(0.3).epsilon(1e-9));
}
