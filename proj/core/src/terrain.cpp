#include "pacc/terrain.hpp"

#include <algorithm>
#include <cmath>

namespace pacc {
namespace {

double stair_height(const StairSpec& s, double x) {
  const double u = x - s.origin_x;
  double z = 0.0;
  for (size_t k = 0; k < s.risers.size(); ++k) {
    const double edge = (static_cast<double>(k) + 1.0) * s.depth;
    if (s.edge_smoothing > 0.0) {
      const double t = std::clamp((u - edge) / s.edge_smoothing + 0.5, 0.0, 1.0);
      z += s.risers[k] * t * t * (3.0 - 2.0 * t);
    } else if (u >= edge) {
      z += s.risers[k];
    }
  }
  return z;
}

double field_height(const HeightfieldSpec& f, double x, double y) {
  const double u = x - f.origin_x;
  if (u < 0.0 || u > f.length || std::abs(y) > 0.5 * f.width) return 0.0;
  const double gx = u / f.spacing;
  const double gy = (y + 0.5 * f.width) / f.spacing;
  const auto ix = static_cast<std::int64_t>(std::floor(gx));
  const auto iy = static_cast<std::int64_t>(std::floor(gy));
  const double fx = gx - static_cast<double>(ix);
  const double fy = gy - static_cast<double>(iy);
  const double h00 = hash_noise(f.seed, ix, iy);
  const double h10 = hash_noise(f.seed, ix + 1, iy);
  const double h01 = hash_noise(f.seed, ix, iy + 1);
  const double h11 = hash_noise(f.seed, ix + 1, iy + 1);
  const double n = (h00 * (1 - fx) + h10 * fx) * (1 - fy) + (h01 * (1 - fx) + h11 * fx) * fy;

  // fade to zero at the patch border so the patch meets the base terrain
  const double ramp = f.spacing;
  const double wx = std::clamp(std::min(u, f.length - u) / ramp, 0.0, 1.0);
  const double wy = std::clamp((0.5 * f.width - std::abs(y)) / ramp, 0.0, 1.0);
  return f.amplitude * n * wx * wy;
}

}  // namespace

double Terrain::height(double x, double y) const {
  switch (kind) {
    case TerrainKind::kFlat: return 0.0;
    case TerrainKind::kStairs: return stair_height(stairs, x);
    case TerrainKind::kHeightfield: return field_height(field, x, y);
    case TerrainKind::kCircuit: return stair_height(stairs, x) + field_height(field, x, y);
  }
  return 0.0;
}

Vec3 Terrain::normal(double x, double y) const {
  const double h = 1e-3;
  const double dzdx = (height(x + h, y) - height(x - h, y)) / (2 * h);
  const double dzdy = (height(x, y + h) - height(x, y - h)) / (2 * h);
  return Vec3(-dzdx, -dzdy, 1.0).normalized();
}

}  // namespace pacc
