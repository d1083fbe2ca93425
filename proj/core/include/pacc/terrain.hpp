#pragma once

#include <cstdint>
#include <vector>

#include "pacc/math_utils.hpp"

namespace pacc {

enum class TerrainKind { kFlat, kStairs, kHeightfield, kCircuit };

// Stair-like obstacle: pallets of fixed depth, signed riser list. The k-th
// riser is the height jump at x = origin_x + (k+1) * depth.
struct StairSpec {
  double origin_x = 0.0;
  double depth = 0.55;
  std::vector<double> risers{0.16, 0.16, 0.13};
  double edge_smoothing = 0.0;  // m, 0 = hard steps
};

// Seeded value-noise patch with bilinear interpolation, faded to zero at the
// patch border. Stands in for the rock field; geometry is non-normative.
struct HeightfieldSpec {
  double origin_x = 0.0;
  double length = 2.0;
  double width = 4.0;  // centered on y = 0
  double spacing = 0.25;
  double amplitude = 0.06;
  std::uint64_t seed = 1;
};

struct Terrain {
  TerrainKind kind = TerrainKind::kFlat;
  StairSpec stairs;
  HeightfieldSpec field;

  double height(double x, double y) const;
  Vec3 normal(double x, double y) const;
};

}  // namespace pacc
