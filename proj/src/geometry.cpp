#include "kubo/geometry.hpp"

#include <cmath>
#include <numbers>

namespace kubo {

BravaisLattice::BravaisLattice(Vec2 a1, Vec2 a2) : basis{a1[0], a1[1], a2[0], a2[1]} {
  if (std::abs(det()) <= 1e-12) throw ConfigError("singular lattice basis");
}

BravaisLattice BravaisLattice::hexagonal() {
  const double h = std::sqrt(3.0) / 2.0;
  return BravaisLattice({h, -0.5}, {h, 0.5});
}

BravaisLattice BravaisLattice::square() { return BravaisLattice({1.0, 0.0}, {0.0, 1.0}); }

double BravaisLattice::cell_area() const { return std::abs(det()); }

Vec2 BravaisLattice::to_cartesian(Vec2 f) const {
  return {basis[0] * f[0] + basis[2] * f[1], basis[1] * f[0] + basis[3] * f[1]};
}

Vec2 BravaisLattice::to_fractional(Vec2 x) const {
  const double d = det();
  return {(basis[3] * x[0] - basis[2] * x[1]) / d, (-basis[1] * x[0] + basis[0] * x[1]) / d};
}

BilayerGeometry make_twisted_pair(const BravaisLattice& base, double twist_degrees, double gap) {
  if (std::abs(base.det()) <= 1e-12) throw ConfigError("singular lattice basis");
  if (!(gap >= 0.0)) throw ConfigError("interlayer_gap must be >= 0");
  const double t = twist_degrees * std::numbers::pi / 180.0;
  const double c = std::cos(t), s = std::sin(t);
  auto rot = [&](Vec2 v) { return Vec2{c * v[0] - s * v[1], s * v[0] + c * v[1]}; };
  BilayerGeometry g;
  g.lattice1 = base;
  g.lattice2 = BravaisLattice(rot(base.a1()), rot(base.a2()));
  g.twist = twist_degrees;
  g.interlayer_gap = gap;
  return g;
}

CutOut CutOut::disc(double r) {
  if (!(r >= 1.0)) throw ConfigError("cut-out radius must be >= 1");
  CutOut c;
  c.shape = Shape::Disc;
  c.radius = r;
  return c;
}

CutOut CutOut::parallelogram(int r) {
  if (r < 1) throw ConfigError("cut-out halfwidth must be >= 1");
  CutOut c;
  c.shape = Shape::Parallelogram;
  c.halfwidth = r;
  return c;
}

namespace {

void add_layer(SiteList& out, const BravaisLattice& lat, const CutOut& cut, Vec2 shift, double z,
               int layer) {
  const Vec2 beta = lat.to_fractional(shift);
  if (cut.shape == CutOut::Shape::Parallelogram) {
    const double r = cut.halfwidth;
    const long lo0 = std::lround(std::ceil(-r - 0.5 - beta[0]));
    const long lo1 = std::lround(std::ceil(-r - 0.5 - beta[1]));
    const int w = 2 * cut.halfwidth + 1;
    for (long m0 = lo0; m0 < lo0 + w; ++m0)
      for (long m1 = lo1; m1 < lo1 + w; ++m1) {
        const Vec2 x = lat.to_cartesian({double(m0), double(m1)});
        out.positions.push_back({x[0] + shift[0], x[1] + shift[1], z});
        out.layer.push_back(layer);
      }
    return;
  }
  // Disc: scan a fractional box that certainly contains |A m + b| <= r.
  const double r = cut.radius;
  const Vec2 e0 = lat.to_fractional({1.0, 0.0});
  const Vec2 e1 = lat.to_fractional({0.0, 1.0});
  const double inv_norm =
      std::sqrt(e0[0] * e0[0] + e0[1] * e0[1] + e1[0] * e1[0] + e1[1] * e1[1]);
  const long span = static_cast<long>(std::ceil(r * inv_norm)) + 1;
  const long c0 = std::lround(-beta[0]), c1 = std::lround(-beta[1]);
  for (long m0 = c0 - span; m0 <= c0 + span; ++m0)
    for (long m1 = c1 - span; m1 <= c1 + span; ++m1) {
      const Vec2 x = lat.to_cartesian({double(m0), double(m1)});
      const double px = x[0] + shift[0], py = x[1] + shift[1];
      if (px * px + py * py <= r * r) {
        out.positions.push_back({px, py, z});
        out.layer.push_back(layer);
      }
    }
}

}  // namespace

SiteList enumerate_sites(const BilayerGeometry& geom, const CutOut& cut, const ConfigShift& shift) {
  if (shift.focal_layer != 1 && shift.focal_layer != 2) throw ConfigError("focal_layer must be 1 or 2");
  if (cut.shape == CutOut::Shape::Parallelogram && cut.halfwidth < 1)
    throw ConfigError("cut-out halfwidth must be >= 1");
  if (cut.shape == CutOut::Shape::Disc && !(cut.radius >= 1.0))
    throw ConfigError("cut-out radius must be >= 1");
  SiteList out;
  for (int layer = 1; layer <= 2; ++layer) {
    const bool focal = layer == shift.focal_layer;
    const Vec2 b = focal ? Vec2{0.0, 0.0} : shift.b;
    const double z = layer == 1 ? 0.0 : geom.interlayer_gap;
    const int first = out.size();
    add_layer(out, geom.lattice(layer), cut, b, z, layer);
    if (focal) {
      for (int i = first; i < out.size(); ++i)
        if (out.positions[i][0] == 0.0 && out.positions[i][1] == 0.0) out.seed_index = i;
    }
  }
  return out;
}

Vec2 wrap_to_cell(Vec2 point, const BravaisLattice& lat) {
  Vec2 f = lat.to_fractional(point);
  for (double& v : f) {
    v -= std::floor(v);
    // round-trip through Cartesian coordinates may land a hair below 0 or 1
    if (v >= 1.0 - 1e-12 || std::abs(v) < 1e-14) v = 0.0;
  }
  return lat.to_cartesian(f);
}

}  // namespace kubo
