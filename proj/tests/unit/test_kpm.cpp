#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "kubo/oracle.hpp"
#include "kubo/poles.hpp"
#include "unit/dense.hpp"

using namespace kubo;
using namespace testing;

namespace {

const BilayerGeometry kGeom = make_twisted_pair(BravaisLattice::hexagonal(), 2.5, 1.0);

LocalSystem system_at(int r, Vec2 b = {0.0, 0.0}, int layer = 1) {
  return build_local_system(kGeom, {}, CutOut::parallelogram(r), ConfigShift{b, layer});
}

IndexSet square(int m1, int m2) {
  std::vector<std::pair<int, int>> p;
  for (int k1 = 0; k1 <= m1; ++k1)
    for (int k2 = 0; k2 <= m2; ++k2) p.emplace_back(k1, k2);
  return IndexSet::from_pairs(std::move(p));
}

IndexSet random_set(std::mt19937_64& gen, int kmax) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double density = 0.05 + 0.9 * u(gen);
  const int m1 = 1 + int(u(gen) * kmax), m2 = 1 + int(u(gen) * kmax);
  std::vector<std::pair<int, int>> p{{m1, m2}};
  for (int k1 = 0; k1 <= m1; ++k1)
    for (int k2 = 0; k2 <= m2; ++k2)
      if (u(gen) < density) p.emplace_back(k1, k2);
  return IndexSet::from_pairs(std::move(p));
}

// sum c (T_k1(H) M_p T_k2(H) M_p')_{ss}
cplx dense_local(const Dense& h, const Dense& mp, const Dense& mpp, const CoeffMatrix& c,
                 const IndexSet& k, int s, const Dense* left = nullptr, const Dense* right = nullptr) {
  const auto t = cheb_powers(h, std::max(k.max_k1(), k.max_k2()));
  cplx acc = 0.0;
  for (const auto& [k1, k2] : k.pairs) {
    Dense prod = t[k1] * mp * t[k2];
    if (right) prod = prod * *right;
    prod = prod * mpp;
    if (left) prod = *left * prod;
    acc += c(k1, k2) * prod(s, s);
  }
  return acc;
}

CoeffMatrix random_coeffs(int kmax, unsigned seed) {
  CoeffMatrix c(kmax);
  const Vector v = random_vector(int(c.coeffs.size()), seed);
  for (std::size_t i = 0; i < v.size(); ++i) c.coeffs[i] = v[i];
  return c;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("Chebyshev sequences") {
  SUBCASE("H = 0") {
    const SparseOperator z = to_sparse(Dense(4));
    const Vector v = random_vector(4, 1);
    OpCounters cnt;
    const auto seq = cheb_apply_sequence(z, v, 8, &cnt);
    CHECK(cnt.matvecs == 8);
    for (int k = 0; k <= 8; ++k) {
      const double t = std::cos(k * std::numbers::pi / 2);
      for (int i = 0; i < 4; ++i) CHECK(std::abs(seq[k][i] - t * v[i]) < 1e-15);
    }
  }
  SUBCASE("H = I/2") {
    const SparseOperator h = to_sparse(0.5 * Dense::identity(5));
    const Vector v = random_vector(5, 2);
    const auto seq = cheb_apply_sequence(h, v, 20);
    double t0 = 1.0, t1 = 0.5;
    for (int k = 0; k <= 20; ++k) {
      const double t = k == 0 ? 1.0 : t1;
      for (int i = 0; i < 5; ++i) CHECK(std::abs(seq[k][i] - t * v[i]) < 1e-14);
      if (k >= 1) {
        const double next = 2 * 0.5 * t1 - t0;
        t0 = t1;
        t1 = next;
      }
    }
  }
  SUBCASE("random sparse Hermitian against dense polynomials") {
    const SparseOperator h = random_hermitian(50, 0.1, 3);
    const Vector v = random_vector(50, 4);
    const auto seq = cheb_apply_sequence(h, v, 5);
    const auto t = cheb_powers(to_dense(h), 5);
    for (int k = 0; k <= 5; ++k) CHECK(max_abs_diff(seq[k], t[k] * v) <= 1e-11);
  }
  CHECK_THROWS_AS(ChebyshevSequence(to_sparse(Dense(3)), Vector(4)), ConfigError);
}

TEST_CASE("local_conductivity on small dense instances") {
  const SparseOperator h = random_hermitian(40, 0.15, 5);
  const SparseOperator mp = random_hermitian(40, 0.1, 6, 1.0), mpp = random_hermitian(40, 0.1, 7, 1.0);
  const Dense dh = to_dense(h), dm = to_dense(mp), dmm = to_dense(mpp);
  SUBCASE("K = {(0,0)} gives (M_p M_p')_ss") {
    CoeffMatrix c(0);
    c(0, 0) = 1.0;
    const auto r = local_conductivity(h, mp, mpp, c, IndexSet::from_pairs({{0, 0}}), 3);
    CHECK(std::abs(r.value - (dm * dmm)(3, 3)) < 1e-14);
    CHECK(r.counters.matvecs == 0);
    CHECK(r.counters.inner_products == 1);
  }
  SUBCASE("general K against the dense sum") {
    const CoeffMatrix c = random_coeffs(25, 8);
    std::mt19937_64 gen(9);
    for (int i = 0; i < 5; ++i) {
      const IndexSet k = random_set(gen, 25);
      const auto r = local_conductivity(h, mp, mpp, c, k, i);
      CHECK(rel(r.value, dense_local(dh, dm, dmm, c, k, i)) <= 1e-10);
      CHECK(r.counters.inner_products == std::int64_t(k.size()));
      CHECK(r.counters.matvecs == k.max_k1() + k.max_k2());
      CHECK(r.counters.velocity_products == std::int64_t(k.k1s.size()) + 1);
    }
  }
  CHECK_THROWS_AS(local_conductivity(h, mp, mpp, CoeffMatrix(3), IndexSet{}, 0), ConfigError);
  CHECK_THROWS_AS(local_conductivity(h, mp, mpp, CoeffMatrix(3), IndexSet::from_pairs({{4, 0}}), 0), ConfigError);
  CHECK_THROWS_AS(local_conductivity(h, mp, mpp, CoeffMatrix(3), IndexSet::from_pairs({{0, 0}}), 40), ConfigError);
}

TEST_CASE("Algorithm 1 on the bilayer against dense evaluation") {
  const LocalSystem sys = system_at(3, {0.3, 0.1});
  REQUIRE(sys.size() <= 200);
  const Dense dh = to_dense(sys.h), m1 = to_dense(sys.m[0]), m2 = to_dense(sys.m[1]);
  const CoeffMatrix c = coeffs_of_F({3.0, 0.2, 0.1, 0.05}, 30);
  std::mt19937_64 gen(10);
  for (int i = 0; i < 3; ++i) {
    const IndexSet k = random_set(gen, 30);
    const auto r = local_conductivity(sys.h, sys.m[0], sys.m[1], c, k, sys.seed());
    CHECK(rel(r.value, dense_local(dh, m1, m2, c, k, sys.seed())) <= 1e-10);
  }
}

TEST_CASE("18-site system against the spectral oracle") {
  const LocalSystem sys = system_at(1);
  REQUIRE(sys.size() == 18);
  const ConductivityParams p{1.0, 0.5, 0.0, 0.0};
  const CoeffMatrix c = coeffs_of_F(p, 40);
  // truncation budget: coefficient mass beyond 40 on a finer grid, times the
  // velocity norms
  const CoeffMatrix fine = coeffs_of_F(p, 120);
  double tail = 0.0;
  for (int k1 = 0; k1 <= 120; ++k1)
    for (int k2 = 0; k2 <= 120; ++k2)
      if (std::max(k1, k2) > 40) tail += std::abs(fine(k1, k2));
  double mnorm = 0.0;
  for (const auto& m : sys.m) {
    const Dense d = to_dense(m);
    for (int i = 0; i < d.n; ++i) {
      double row = 0.0;
      for (int j = 0; j < d.n; ++j) row += std::abs(d(i, j));
      mnorm = std::max(mnorm, row);
    }
  }
  const IndexSet k = square(40, 40);
  const LocalConductivityResult r = local_conductivity_tensor(sys, c, k);
  const auto ex = local_conductivity_exact_tensor(sys, p);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(r.sigma[i] - ex[i]) <= 10.0 * tail * mnorm * mnorm + 1e-13);
  CHECK(r.counters.inner_products == 4 * std::int64_t(k.size()));
  for (const auto& e : r.entry_counters) CHECK(e.inner_products == std::int64_t(k.size()));
}

TEST_CASE("kernel swap agrees with the oracle") {
  const LocalSystem sys = system_at(1, {0.2, 0.7});
  const ConductivityParams p{2.0, 0.4, 0.0, 0.1};
  const CoeffMatrix c = coeffs_of_F(p, 60);
  // transposed coefficients expand F(E2, E1)
  CoeffMatrix ct(60);
  for (int k1 = 0; k1 <= 60; ++k1)
    for (int k2 = 0; k2 <= 60; ++k2) ct(k1, k2) = c(k2, k1);
  const EigenDecomposition eig = dense_eig(sys.h);
  const IndexSet k = square(60, 60);
  for (int pp = 0; pp < 2; ++pp) {
    const auto& m = sys.m[pp];
    const cplx a = local_conductivity(sys.h, m, m, c, k, sys.seed()).value;
    const cplx b = local_conductivity(sys.h, m, m, ct, k, sys.seed()).value;
    const cplx oa = local_spectral_sum(eig, m, m, [&](double x, double y) { return F_zeta(x, y, p); }, sys.seed());
    const cplx ob = local_spectral_sum(eig, m, m, [&](double x, double y) { return F_zeta(y, x, p); }, sys.seed());
    CHECK(std::abs(a - oa) <= 1e-9 * std::abs(oa));
    CHECK(std::abs(b - ob) <= 1e-9 * std::abs(ob));
  }
}

TEST_CASE("Algorithm 3 matches Algorithm 1") {
  std::mt19937_64 gen(11);
  for (int t = 0; t < 20; ++t) {
    const SparseOperator h = random_hermitian(60, 0.08, 100 + t);
    const SparseOperator mp = random_hermitian(60, 0.05, 200 + t, 1.0);
    const SparseOperator mpp = random_hermitian(60, 0.05, 300 + t, 1.0);
    const CoeffMatrix c = random_coeffs(40, 400 + t);
    const IndexSet k = random_set(gen, 40);
    const auto a = local_conductivity(h, mp, mpp, c, k, t);
    const auto b = local_conductivity_lowmem(h, mp, mpp, c, k, t);
    CHECK(rel(b.value, a.value) <= 1e-12);
    CHECK(b.counters.inner_products == a.counters.inner_products);
    CHECK(b.counters.matvecs == a.counters.matvecs);
  }
}

TEST_CASE("Algorithm 3 memory") {
  const SparseOperator h = random_hermitian(50, 0.1, 12);
  const SparseOperator mp = random_hermitian(50, 0.1, 13, 1.0);
  SUBCASE("full square") {
    const CoeffMatrix c = random_coeffs(30, 14);
    const IndexSet k = square(30, 30);
    const auto r = local_conductivity_lowmem(h, mp, mp, c, k, 0);
    CHECK(r.counters.peak_cached_vectors == std::int64_t(k.k1s.size()) + 3);
  }
  SUBCASE("relaxation wedge") {
    const ConductivityParams p{std::numbers::pi / std::sqrt(0.06), 0.06, 0.0, 0.0};
    const IndexSet k = truncation_set_rate(decay_rates(p), 1e-3);
    const CoeffMatrix c = coeffs_of_F(p, std::max(k.max_k1(), k.max_k2()));
    const auto r = local_conductivity_lowmem(h, mp, mp, c, k, 0);
    MESSAGE("|K| " << k.size() << " |K1| " << k.k1s.size() << " band " << k.band_width() << " peak "
                   << r.counters.peak_cached_vectors);
    CHECK(r.counters.peak_cached_vectors <= k.band_width() + 6);
    CHECK(r.counters.peak_cached_vectors < std::int64_t(k.k1s.size()));
    CHECK(rel(r.value, local_conductivity(h, mp, mp, c, k, 0).value) <= 1e-12);
  }
}

TEST_CASE("locality: results stop depending on r") {
  const ConductivityParams p{1.0, 0.5, 0.0, 0.0};
  const CoeffMatrix c = coeffs_of_F(p, 200);
  const IndexSet k = truncation_set_greedy(c, 1e-3);
  const int r = (k.max_sum() + 2 + 1) / 2;
  const auto a = local_conductivity_tensor(system_at(r, {0.4, 0.2}), c, k).sigma;
  const auto b = local_conductivity_tensor(system_at(r + 2, {0.4, 0.2}), c, k).sigma;
  for (int i = 0; i < 4; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12 * std::abs(a[i]));
}

TEST_CASE("weighted local conductivity") {
  const SparseOperator h = random_hermitian(30, 0.2, 15);
  const SparseOperator mp = random_hermitian(30, 0.2, 16, 1.0), mpp = random_hermitian(30, 0.2, 17, 1.0);
  const Dense dh = to_dense(h), dm = to_dense(mp), dmm = to_dense(mpp);
  auto resolvent = [&](cplx z) { return inverse(dh + (-z) * Dense::identity(dh.n)); };
  SUBCASE("pole far from the spectrum") {
    const cplx z(0.3, 10.0);
    const Dense q = resolvent(z);
    const CoeffMatrix c = coeffs_of([](double a, double b) { return 1.0 / (a - b + cplx(0.0, 0.5)); }, 20);
    const IndexSet k = square(20, 20);
    const auto r = weighted_local_conductivity(h, mp, mpp, c, k, 2, {z}, 1e-12);
    const cplx ref = dense_local(dh, dm, dmm, c, k, 2, &q, &q);
    CHECK(std::abs(r.value - ref) <= 1e-8 * std::abs(ref));
    CHECK(r.counters.resolvent_solves == 2);
  }
  SUBCASE("k1 = k2 = 0 only") {
    const cplx z(0.1, 0.5);
    const Dense q = resolvent(z);
    CoeffMatrix c(0);
    c(0, 0) = 1.0;
    const auto r = weighted_local_conductivity(h, mp, mpp, c, IndexSet::from_pairs({{0, 0}}), 4, {z}, 1e-12);
    const cplx ref = (q * dm * q * dmm)(4, 4);
    CHECK(std::abs(r.value - ref) <= 1e-9 * std::abs(ref));
  }
  SUBCASE("coefficients of the relaxation factor come from the same transform") {
    const ConductivityParams p{5.0, 0.1, 0.2, 0.0};
    const CoeffMatrix a = coeffs_of([&](double x, double y) { return 1.0 / (x - y + cplx(p.omega, p.eta)); }, 64);
    const CoeffMatrix b = coeffs_of([&](double x, double y) { return 1.0 / (x - y + p.omega + cplx(0.0, p.eta)); }, 64);
    CHECK(a.coeffs == b.coeffs);
  }
}

TEST_CASE("counter accumulation") {
  OpCounters a{5, 3, 1, 10, 2}, b{1, 1, 1, 4, 7};
  a += b;
  CHECK(a.matvecs == 6);
  CHECK(a.inner_products == 4);
  CHECK(a.resolvent_solves == 2);
  CHECK(a.peak_cached_vectors == 10);
  CHECK(a.velocity_products == 9);
}
