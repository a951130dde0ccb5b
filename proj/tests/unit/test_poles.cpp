#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "kubo/poles.hpp"
#include "unit/dense.hpp"

using namespace kubo;
using namespace testing;

namespace {

const BilayerGeometry kGeom = make_twisted_pair(BravaisLattice::hexagonal(), 2.5, 1.0);
constexpr double kPi = std::numbers::pi;

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double norm2(const Vector& v) {
  double s = 0.0;
  for (const cplx& x : v) s += std::norm(x);
  return std::sqrt(s);
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("pole_set") {
  const ConductivityParams p{30.0, 1.0, 0.0, -0.2};
  CHECK(pole_set(0, p).poles.empty());
  const auto one = pole_set(1, p).poles;
  REQUIRE(one.size() == 2);
  CHECK(one[0] == cplx(-0.2, -kPi / 30.0));
  CHECK(one[1] == cplx(-0.2, kPi / 30.0));
  const PoleSet three = pole_set(3, p);
  REQUIRE(three.poles.size() == 6);
  const int ls[] = {-5, -3, -1, 1, 3, 5};
  for (int i = 0; i < 6; ++i) {
    CHECK(three.poles[i].real() == -0.2);
    CHECK(three.poles[i].imag() == doctest::Approx(ls[i] * kPi / 30.0).epsilon(1e-15));
    CHECK(three.poles[i] == std::conj(three.poles[5 - i]));
    CHECK(std::abs(three.poles[i].imag()) >= kPi / 30.0 * (1 - 1e-15));
  }
  CHECK_THROWS_AS(pole_set(-1, p), ConfigError);
  CHECK_THROWS_AS(pole_set(2, {0.0, 1.0, 0.0, 0.0}), ConfigError);
  CHECK_NOTHROW(pole_set(0, {0.0, 1.0, 0.0, 0.0}));
}

TEST_CASE("remainder_eval") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const ConductivityParams p{40.0, 0.3, 0.1, -0.15};
  const cplx s(p.omega, p.eta);
  SUBCASE("k = 0 is the undivided kernel") {
    for (int i = 0; i < 50; ++i) {
      const double a = u(gen), b = u(gen);
      CHECK(rel(remainder_eval(a, b, p, 0), (a - b + s) * F_zeta(a, b, p)) <= 1e-14);
    }
    CHECK(rel(remainder_eval(0.2, 0.2, p, 0), s * F_zeta(0.2, 0.2, p)) <= 1e-14);
  }
  SUBCASE("reconstruction identity") {
    for (double beta : {5.0, 20.0, 50.0}) {
      const ConductivityParams q{beta, 0.3, 0.1, -0.15};
      for (int k = 0; k <= 3; ++k) {
        // F spans many decades at large beta; errors are measured against sup|F|
        double worst = 0.0, sup = 0.0;
        for (int i = 0; i < 100; ++i) {
          const double a = u(gen), b = i % 10 == 0 ? a : u(gen);
          cplx sum = remainder_eval(a, b, q, k);
          for (cplx z : pole_set(k, q).poles) sum += (1.0 / beta) / ((a - z) * (b - z));
          worst = std::max(worst, std::abs(sum / (a - b + s) - F_zeta(a, b, q)));
          sup = std::max(sup, std::abs(F_zeta(a, b, q)));
        }
        CHECK(worst <= 1e-10 * sup);
      }
    }
  }
  SUBCASE("the remainder is the tail of the Matsubara sum") {
    // f_temp = (1/beta) sum over all odd l of 1/((E1 - z_l)(E2 - z_l))
    const ConductivityParams q{10.0, 0.3, 0.0, 0.05};
    const long L = 400001;
    for (int k : {1, 3}) {
      for (auto [a, b] : {std::pair{0.3, -0.4}, std::pair{0.05, 0.05}, std::pair{-0.9, 0.7}}) {
        std::complex<long double> acc = 0.0L;
        for (long l = L; l >= 2 * k + 1; l -= 2)
          for (long sgn : {-1L, 1L}) {
            const std::complex<long double> z(q.e_fermi, sgn * l * (long double)kPi / q.beta);
            acc += 1.0L / (((long double)a - z) * ((long double)b - z));
          }
        const cplx tail = -q.beta / (kPi * kPi * double(L + 1));  // odd |l| > L
        const cplx ref = cplx(acc) / q.beta + tail;
        CHECK(rel(remainder_eval(a, b, q, k), ref) <= 1e-8);
      }
    }
  }
  SUBCASE("removing poles restores the wedge") {
    // 2D fit of log|c| = a0 - alpha_max k1 - alpha_min k2 over k1 >= k2 >= 10
    // with alpha_max pinned, compared through alpha_anti
    const ConductivityParams q{50.0, 0.1, 0.0, 0.0};
    const int k = 3;
    const DecayRates r = decay_rates(q, 2 * k + 1);
    REQUIRE(r.klass == Regime::Relaxation);
    const cplx sq(q.omega, q.eta);
    const CoeffMatrix c = coeffs_of([&](double a, double b) { return remainder_eval(a, b, q, k) / (a - b + sq); }, 500);
    const double c00 = std::abs(c(0, 0));
    std::vector<double> x, y;
    for (int k1 = 10; k1 <= 500; ++k1)
      for (int k2 = 10; k2 <= k1; ++k2) {
        const double v = std::abs(c(k1, k2)) / c00;
        if (v < 1e-9) continue;
        x.push_back(-k2);
        y.push_back(std::log(v) + r.alpha_max * k1);
      }
    const double anti = 0.5 * (r.alpha_max - slope(x, y));
    MESSAGE("fitted alpha_anti " << anti << " vs " << r.alpha_anti);
    CHECK(std::abs(anti - r.alpha_anti) <= 0.3 * r.alpha_anti);
  }
}

TEST_CASE("optimal_k") {
  CHECK(optimal_k({1.0, 0.1, 0.0, 0.0}) == 0);   // beta sqrt(eta) = 0.32
  CHECK(optimal_k({2.5, 0.1, 0.0, 0.0}) == 1);   // 0.79, still below eta^{-1/2}
  CHECK(optimal_k({10.0, 0.1, 0.0, 0.0}) == int(std::ceil(std::sqrt(10.0) * std::pow(0.1, 0.25))));
  CHECK(optimal_k({100.0, 0.1, 0.0, 0.0}) == int(std::ceil(std::pow(100.0, 2.0 / 3.0) * std::sqrt(0.1))));
  // eta = 1 collapses the middle regime; the paper hand-picked k = 3 here
  CHECK(optimal_k({30.0, 1.0, 0.0, 0.0}) == 10);
  for (double eta : {0.01, 0.1, 0.5, 1.0, 2.0}) {
    int prev = 0;
    for (double beta = 0.1; beta < 1e4; beta *= 1.3) {
      const int k = optimal_k({beta, eta, 0.0, 0.0});
      CHECK(k >= prev);
      prev = k;
    }
  }
}

TEST_CASE("stability ratio and grouping") {
  const ConductivityParams p{20.0, 1.0, 0.0, -0.2};
  const PoleSet ps = pole_set(3, p);
  SUBCASE("ratio on the 1001-point grid") {
    const std::vector<cplx> zs{ps.poles[2], ps.poles[3]};
    double lo = INFINITY, hi = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double x = -1.0 + i / 500.0;
      const double q = 1.0 / std::abs((x - zs[0]) * (x - zs[1]));
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    CHECK(stability_ratio(zs) == doctest::Approx(hi / lo).epsilon(1e-12));
  }
  SUBCASE("singletons") {
    const auto g = group_poles(ps, 1);
    REQUIRE(g.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(g[i].poles.size() == 1);
      CHECK(g[i].stability_ratio == doctest::Approx(stability_ratio(g[i].poles)));
    }
  }
  SUBCASE("all poles in one group") {
    const auto g = group_poles(ps, 6);
    REQUIRE(g.size() == 1);
    CHECK(g[0].poles.size() == 6);
    MESSAGE("stability ratio of the 6-pole group " << g[0].stability_ratio);
  }
  SUBCASE("conjugate pairs stay together") {
    const auto g = group_poles(ps, 3);
    std::size_t total = 0;
    for (const auto& grp : g) {
      CHECK(grp.poles.size() <= 3);
      total += grp.poles.size();
      for (cplx z : grp.poles)
        CHECK(std::find(grp.poles.begin(), grp.poles.end(), std::conj(z)) != grp.poles.end());
    }
    CHECK(total == 6);
  }
  SUBCASE("beta = 1e4 keeps groups at four poles or fewer") {
    const auto g = group_poles(pole_set(10, {1e4, 1.0, 0.0, 0.0}), 20);
    for (const auto& grp : g) {
      CHECK(grp.poles.size() <= 4);
      CHECK(grp.stability_ratio <= 1e12);
    }
  }
  CHECK_THROWS_AS(group_poles(ps, 0), ConfigError);
}

TEST_CASE("resolvent_apply") {
  SUBCASE("H = 0") {
    const SparseOperator z = to_sparse(Dense(6));
    const Vector v = random_vector(6, 22);
    const Vector x = resolvent_apply(z, cplx(0.0, 2.0), v, 1e-12);
    for (int i = 0; i < 6; ++i) CHECK(std::abs(x[i] - v[i] / cplx(0.0, -2.0)) <= 1e-12);
  }
  SUBCASE("random 50 x 50") {
    const SparseOperator h = random_hermitian(50, 0.1, 23);
    const Vector v = random_vector(50, 24);
    const cplx z(0.1, 0.5);
    OpCounters cnt;
    const Vector x = resolvent_apply(h, z, v, 1e-9, &cnt);
    Vector res = to_dense(h) * x;
    for (int i = 0; i < 50; ++i) res[i] -= z * x[i] + v[i];
    CHECK(norm2(res) <= 1e-8 * norm2(v));
    CHECK(cnt.resolvent_solves == 1);
    CHECK(cnt.matvecs == resolvent_degree(z, 1e-9) + 1);
    const Vector ref = inverse(to_dense(h) + (-z) * Dense::identity(50)) * v;
    CHECK(max_abs_diff(x, ref) <= 1e-8 * norm2(v));
  }
  SUBCASE("degree grows linearly in 1/Im z") {
    std::vector<double> x, y;
    for (double im : {1.0, 0.5, 0.25, 0.125}) {
      const int d = resolvent_degree(cplx(0.2, im), 1e-10);
      CHECK(d <= resolvent_degree_cap(cplx(0.2, im)));
      x.push_back(std::log(1.0 / im));
      y.push_back(std::log(double(d)));
    }
    const double s = slope(x, y);
    MESSAGE("log-log slope of degree vs 1/Im z: " << s);
    CHECK(s >= 1.0 / 3.0);
    CHECK(s <= 3.0);
  }
  SUBCASE("errors") {
    const SparseOperator h = random_hermitian(10, 0.3, 25);
    CHECK_THROWS_AS(resolvent_apply(h, cplx(0.3, 0.0), Vector(10, 1.0), 1e-8), ConfigError);
    CHECK_THROWS_AS(resolvent_apply(h, cplx(0.3, 0.5), Vector(9, 1.0), 1e-8), ConfigError);
    CHECK_THROWS_AS(resolvent_apply(h, cplx(0.3, 0.5), Vector(10, 1.0), 1e-300), NumericalError);
  }
  SUBCASE("pole groups against dense inverses") {
    const SparseOperator h = random_hermitian(40, 0.1, 26);
    const Vector v = random_vector(40, 27);
    const std::vector<cplx> zs = pole_set(2, {15.0, 1.0, 0.0, 0.1}).poles;
    const Vector x = apply_pole_weight(h, zs, v, 1e-10);
    Vector ref = v;
    for (cplx z : zs) ref = inverse(to_dense(h) + (-z) * Dense::identity(40)) * ref;
    CHECK(max_abs_diff(x, ref) <= 1e-8 * norm2(ref));
    CHECK(apply_pole_weight(h, {}, v, 1e-10) == v);
  }
}

TEST_CASE("Algorithm 2") {
  const LocalSystem sys = build_local_system(kGeom, {}, CutOut::parallelogram(10), ConfigShift{{0.3, 0.6}, 1});
  SUBCASE("k = 0 reduces to Algorithm 1") {
    const ConductivityParams p{2.0, 0.3, 0.05, 0.1};
    const PolePlan plan = make_pole_plan(p, 0, 1, 1e-4);
    CHECK(plan.groups.empty());
    CHECK(plan.warnings.empty());
    const CoeffMatrix c = coeffs_of_F(p, 500);
    const IndexSet k = truncation_set_greedy(c, 1e-4);
    const auto a = local_conductivity_via_poles_tensor(sys, plan).sigma;
    const auto b = local_conductivity_tensor(sys, c, k).sigma;
    for (int i = 0; i < 4; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-10 * std::abs(b[i]));
  }
  SUBCASE("poles, grouped poles and the polynomial path agree") {
    const ConductivityParams p{20.0, 1.0, 0.0, -0.2};
    const PolePlan single = make_pole_plan(p, 3, 1, 1e-3);
    const PolePlan grouped = make_pole_plan(p, 3, 6, 1e-3);
    REQUIRE(grouped.groups.size() == 1);
    MESSAGE("6-pole group stability ratio " << grouped.groups[0].stability_ratio);
    CHECK_FALSE(single.warnings.empty());  // eta^{-3/2} = 1 is far below any degree
    const auto a = local_conductivity_via_poles_tensor(sys, single);
    const auto b = local_conductivity_via_poles_tensor(sys, grouped);
    const CoeffMatrix c = coeffs_of_F(p, 500);
    const auto poly = local_conductivity_tensor(sys, c, truncation_set_greedy(c, 1e-3));
    double scale = 0.0;
    for (cplx s : poly.sigma) scale = std::max(scale, std::abs(s));
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(a.sigma[i] - poly.sigma[i]) <= 2e-3 * scale);
      CHECK(std::abs(b.sigma[i] - a.sigma[i]) <= 5e-3 * scale);
    }
    CHECK(a.counters.resolvent_solves == 4 * 2 * 6);
    CHECK(b.counters.resolvent_solves == 4 * 2);
    CHECK(a.counters.inner_products < poly.counters.inner_products);
  }
}

TEST_CASE("coefficient counts grow more slowly with beta on the pole path") {
  std::vector<double> lb, lpoly, lpole;
  for (double beta : {20.0, 40.0, 80.0}) {
    const ConductivityParams p{beta, 1.0, 0.0, 0.0};
    const PolePlan plan = make_pole_plan(p, optimal_k(p), 1, 1e-3);
    std::size_t n = plan.remainder_kept.size();
    for (const auto& g : plan.groups) n += g.kept.size();
    lb.push_back(std::log(beta));
    lpole.push_back(std::log(double(n)));
    lpoly.push_back(std::log(double(truncation_set_greedy(coeffs_of_F(p, 500), 1e-3).size())));
  }
  const double sp = slope(lb, lpole), sq = slope(lb, lpoly);
  MESSAGE("slopes: poles " << sp << ", polynomial " << sq);
  CHECK(sp < sq);
}

TEST_CASE("plan validation") {
  CHECK_THROWS_AS(make_pole_plan({1.0, 0.0, 0.0, 0.0}, 1, 1, 1e-3), ConfigError);
  CHECK_THROWS_AS(make_pole_plan({1.0, 0.5, 0.0, 0.0}, 1, 1, -1.0), ConfigError);
  CHECK_THROWS_AS(make_pole_plan({1.0, 0.5, 0.0, 0.0}, 1, 1, 1e-3, 1e-8, 0), ConfigError);
  const PolePlan plan = make_pole_plan({20.0, 0.01, 0.0, 0.0}, 1, 1, 1e-3, 1e-8, 200);
  CHECK(plan.warnings.empty());
  CHECK(plan.remainder_rates.alpha_max == decay_rates({20.0, 0.01, 0.0, 0.0}, 3).alpha_max);
}
