#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "kubo/geometry.hpp"

using namespace kubo;

namespace {

bool close(Vec2 a, Vec2 b, double tol = 1e-12) {
  return std::abs(a[0] - b[0]) <= tol && std::abs(a[1] - b[1]) <= tol;
}

std::vector<Vec3> sorted_positions(const SiteList& s, int layer) {
  std::vector<Vec3> out;
  for (int i = 0; i < s.size(); ++i)
    if (s.layer[i] == layer) out.push_back(s.positions[i]);
  // round before sorting so that equal points compare equal
  for (auto& p : out)
    for (double& v : p) v = std::round(v * 1e9) / 1e9;
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("lattice basics") {
  const auto hex = BravaisLattice::hexagonal();
  CHECK(hex.cell_area() == doctest::Approx(std::sqrt(3.0) / 2));
  // nearest-neighbour distance is 1
  const Vec2 a1 = hex.a1(), a2 = hex.a2();
  CHECK(std::hypot(a1[0], a1[1]) == doctest::Approx(1.0));
  CHECK(std::hypot(a2[0], a2[1]) == doctest::Approx(1.0));
  CHECK(std::hypot(a2[0] - a1[0], a2[1] - a1[1]) == doctest::Approx(1.0));
  CHECK_THROWS_AS(BravaisLattice({1.0, 2.0}, {2.0, 4.0}), ConfigError);
  const Vec2 x{0.3, -1.7};
  CHECK(close(hex.to_cartesian(hex.to_fractional(x)), x));
}

TEST_CASE("make_twisted_pair") {
  const auto hex = BravaisLattice::hexagonal();
  SUBCASE("zero twist gives identical lattices") {
    const auto g = make_twisted_pair(hex, 0.0, 1.0);
    for (int i = 0; i < 4; ++i) CHECK(g.lattice2.basis[i] == doctest::Approx(g.lattice1.basis[i]));
  }
  SUBCASE("2.5 degrees rotates the basis and keeps the determinant") {
    const auto g = make_twisted_pair(hex, 2.5, 1.0);
    const double t = 2.5 * std::numbers::pi / 180;
    const Vec2 a1 = hex.a1();
    CHECK(close(g.lattice2.a1(), {std::cos(t) * a1[0] - std::sin(t) * a1[1], std::sin(t) * a1[0] + std::cos(t) * a1[1]}));
    CHECK(g.lattice2.det() == doctest::Approx(hex.det()).epsilon(1e-14));
    CHECK(g.interlayer_gap == 1.0);
  }
  SUBCASE("90 degrees on the square lattice maps the lattice onto itself") {
    const auto g = make_twisted_pair(BravaisLattice::square(), 90.0, 1.0);
    for (const Vec2 v : {g.lattice2.a1(), g.lattice2.a2()}) {
      const Vec2 f = g.lattice1.to_fractional(v);
      CHECK(std::abs(f[0] - std::round(f[0])) < 1e-12);
      CHECK(std::abs(f[1] - std::round(f[1])) < 1e-12);
    }
    CHECK(std::abs(g.lattice2.det()) == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(make_twisted_pair(hex, 1.0, -0.5), ConfigError);
}

TEST_CASE("parallelogram site counts and seed") {
  const auto g = make_twisted_pair(BravaisLattice::hexagonal(), 2.5, 1.0);
  for (int r : {1, 2, 5}) {
    for (Vec2 b : {Vec2{0, 0}, Vec2{0.3, 0.2}}) {
      for (int layer : {1, 2}) {
        const SiteList s = enumerate_sites(g, CutOut::parallelogram(r), {b, layer});
        CHECK(s.size() == 2 * (2 * r + 1) * (2 * r + 1));
        const Vec3 seed = s.positions[s.seed_index];
        CHECK(seed[0] == 0.0);
        CHECK(seed[1] == 0.0);
        CHECK(seed[2] == (layer == 1 ? 0.0 : 1.0));
        CHECK(s.layer[s.seed_index] == layer);
        for (int i = 0; i < s.size(); ++i) CHECK(s.positions[i][2] == (s.layer[i] == 1 ? 0.0 : 1.0));
      }
    }
  }
  SUBCASE("shift translates the other layer") {
    const SiteList a = enumerate_sites(g, CutOut::parallelogram(1), {{0, 0}, 1});
    const SiteList b = enumerate_sites(g, CutOut::parallelogram(1), {{0.3, 0.2}, 1});
    const auto pa = sorted_positions(a, 2), pb = sorted_positions(b, 2);
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
      CHECK(pb[i][0] - pa[i][0] == doctest::Approx(0.3));
      CHECK(pb[i][1] - pa[i][1] == doctest::Approx(0.2));
    }
    CHECK(sorted_positions(a, 1) == sorted_positions(b, 1));
  }
  CHECK_THROWS_AS(CutOut::parallelogram(0), ConfigError);
}

TEST_CASE("no duplicate positions") {
  const auto g = make_twisted_pair(BravaisLattice::hexagonal(), 2.5, 1.0);
  const SiteList s = enumerate_sites(g, CutOut::parallelogram(4), {{0.11, 0.52}, 2});
  std::set<std::array<long, 3>> seen;
  for (const Vec3& p : s.positions)
    CHECK(seen.insert({std::lround(p[0] * 1e8), std::lround(p[1] * 1e8), std::lround(p[2] * 1e8)}).second);
}

TEST_CASE("disc count matches brute force") {
  const auto hex = BravaisLattice::hexagonal();
  const auto g = make_twisted_pair(hex, 0.0, 1.0);
  int expect = 0;
  for (int m0 = -5; m0 <= 5; ++m0)
    for (int m1 = -5; m1 <= 5; ++m1) {
      const Vec2 x = hex.to_cartesian({double(m0), double(m1)});
      expect += std::hypot(x[0], x[1]) <= 2.05;
    }
  const SiteList s = enumerate_sites(g, CutOut::disc(2.05), {{0, 0}, 1});
  CHECK(expect == 19);  // hexagonal shells 1 + 6 + 6 + 6 (distances 0, 1, sqrt3, 2)
  CHECK(std::count(s.layer.begin(), s.layer.end(), 1) == expect);
  CHECK(std::count(s.layer.begin(), s.layer.end(), 2) == expect);
  CHECK_THROWS_AS(CutOut::disc(0.5), ConfigError);
}

TEST_CASE("configurations are periodic in b") {
  const auto g = make_twisted_pair(BravaisLattice::hexagonal(), 2.5, 1.0);
  for (int layer : {1, 2}) {
    const BravaisLattice& other = g.lattice(3 - layer);
    const Vec2 b = other.to_cartesian({0.37, 0.81});
    for (Vec2 n : {Vec2{1, 0}, Vec2{-2, 3}}) {
      const Vec2 an = other.to_cartesian(n);
      const SiteList s0 = enumerate_sites(g, CutOut::parallelogram(3), {b, layer});
      const SiteList s1 = enumerate_sites(g, CutOut::parallelogram(3), {{b[0] + an[0], b[1] + an[1]}, layer});
      CHECK(sorted_positions(s0, 1) == sorted_positions(s1, 1));
      CHECK(sorted_positions(s0, 2) == sorted_positions(s1, 2));
    }
  }
}

TEST_CASE("wrap_to_cell") {
  const auto lat = make_twisted_pair(BravaisLattice::hexagonal(), 2.5, 1.0).lattice2;
  const Vec2 inside = lat.to_cartesian({0.25, 0.5});
  CHECK(close(wrap_to_cell(inside, lat), inside));
  CHECK(close(wrap_to_cell(lat.to_cartesian({1.0, 0.0}), lat), {0.0, 0.0}));
  CHECK(close(wrap_to_cell(lat.to_cartesian({1.25, -0.5}), lat), lat.to_cartesian({0.25, 0.5})));
  // idempotent, and always lands in the half-open cell
  for (int i = 0; i < 200; ++i) {
    const Vec2 p{std::sin(i * 1.7) * 9.0, std::cos(i * 0.3) * 7.0};
    const Vec2 w = wrap_to_cell(p, lat);
    CHECK(close(wrap_to_cell(w, lat), w));
    const Vec2 f = lat.to_fractional(w);
    CHECK(f[0] >= -1e-14);
    CHECK(f[0] < 1.0);
    CHECK(f[1] >= -1e-14);
    CHECK(f[1] < 1.0);
    const Vec2 d = lat.to_fractional({w[0] - p[0], w[1] - p[1]});
    CHECK(std::abs(d[0] - std::round(d[0])) < 1e-9);
    CHECK(std::abs(d[1] - std::round(d[1])) < 1e-9);
  }
}
