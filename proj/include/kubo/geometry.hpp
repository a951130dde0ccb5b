#pragma once

#include <array>
#include <vector>

#include "kubo/common.hpp"

namespace kubo {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

// Columns a1 = (basis[0], basis[1]), a2 = (basis[2], basis[3]).
struct BravaisLattice {
  std::array<double, 4> basis{1.0, 0.0, 0.0, 1.0};

  BravaisLattice() = default;
  BravaisLattice(Vec2 a1, Vec2 a2);

  // Unit nearest-neighbour distance. The basis is mirror-symmetric about the
  // x-axis (reflection swaps a1 and a2), which keeps the parallelogram
  // cut-out invariant under that reflection.
  static BravaisLattice hexagonal();
  static BravaisLattice square();

  Vec2 a1() const { return {basis[0], basis[1]}; }
  Vec2 a2() const { return {basis[2], basis[3]}; }
  double det() const { return basis[0] * basis[3] - basis[2] * basis[1]; }
  double cell_area() const;
  Vec2 to_cartesian(Vec2 frac) const;
  Vec2 to_fractional(Vec2 x) const;
};

struct BilayerGeometry {
  BravaisLattice lattice1;
  BravaisLattice lattice2;
  double twist = 0.0;  // degrees
  double interlayer_gap = 1.0;

  const BravaisLattice& lattice(int layer) const { return layer == 1 ? lattice1 : lattice2; }
};

BilayerGeometry make_twisted_pair(const BravaisLattice& base, double twist_degrees, double gap);

struct CutOut {
  enum class Shape { Disc, Parallelogram };
  Shape shape = Shape::Parallelogram;
  double radius = 0.0;  // Disc
  int halfwidth = 0;    // Parallelogram

  static CutOut disc(double r);
  static CutOut parallelogram(int r);
};

struct ConfigShift {
  Vec2 b{0.0, 0.0};
  int focal_layer = 1;
};

struct SiteList {
  std::vector<Vec3> positions;
  std::vector<int> layer;
  int seed_index = 0;

  int size() const { return static_cast<int>(positions.size()); }
};

// The focal layer keeps a site at the origin; the other layer is translated
// by b. For the parallelogram, the shifted layer is selected by fractional
// coordinate m + A^{-1} b in [-r-1/2, r+1/2)^2 rather than by m itself: this
// is the same set at b = 0 and makes the site set exactly periodic in b.
SiteList enumerate_sites(const BilayerGeometry& geom, const CutOut& cut, const ConfigShift& shift);

Vec2 wrap_to_cell(Vec2 point, const BravaisLattice& lat);

}  // namespace kubo
