#include "kubo/confunc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kubo {

void ConductivityParams::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be finite and >= 0");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be finite and > 0");
  if (!std::isfinite(omega)) throw ConfigError("omega must be finite");
  if (!std::isfinite(e_fermi)) throw ConfigError("e_fermi must be finite");
}

std::string regime_name(Regime r) {
  switch (r) {
    case Regime::Relaxation:
      return "relaxation";
    case Regime::Mixed:
      return "mixed";
    case Regime::Temperature:
      return "temperature";
  }
  return "?";
}

double fermi(double e, const ConductivityParams& p) {
  const double x = p.beta * (e - p.e_fermi);
  // The tanh form loses relative accuracy in the tail (1 - tanh cancels);
  // exp(-x) / (1 + exp(-x)) does not.
  if (x > 0.0) {
    const double t = std::exp(-x);
    return t / (1.0 + t);
  }
  return 1.0 / (1.0 + std::exp(x));
}

namespace {

// log cosh(u) and log sinh(u) without overflow, for Re(u) of either sign.
cplx log_cosh(cplx u) {
  if (u.real() < 0.0) u = -u;
  return u + std::log((1.0 + std::exp(-2.0 * u)) / 2.0);
}

cplx log_sinh(cplx u) {
  if (u.real() < 0.0) return log_sinh(-u) + cplx(0.0, std::numbers::pi);
  return u + std::log((1.0 - std::exp(-2.0 * u)) / 2.0);
}

}  // namespace

cplx f_temp(cplx e1, cplx e2, const ConductivityParams& p) {
  const double b = p.beta;
  if (b == 0.0) return 0.0;
  // f(a) - f(c) = -sinh(b(a-c)/2) / (2 cosh(b a/2) cosh(b c/2)): no
  // cancellation, so the quotient stays accurate for tiny |E1 - E2|.
  const cplx u1 = 0.5 * b * (e1 - p.e_fermi);
  const cplx u2 = 0.5 * b * (e2 - p.e_fermi);
  const cplx d = e1 - e2;
  if (d == 0.0) {
    if (std::abs(u1.real()) > 300.0) return -b * std::exp(-2.0 * log_cosh(u1)) / 4.0;
    const cplx c = std::cosh(u1);
    return -b / (4.0 * c * c);
  }
  const cplx h = 0.5 * b * d;
  if (std::max({std::abs(u1.real()), std::abs(u2.real()), std::abs(h.real())}) > 300.0)
    return -std::exp(log_sinh(h) - log_cosh(u1) - log_cosh(u2)) / (2.0 * d);
  return -std::sinh(h) / (2.0 * d * std::cosh(u1) * std::cosh(u2));
}

cplx F_zeta(cplx e1, cplx e2, const ConductivityParams& p) {
  return f_temp(e1, e2, p) / (e1 - e2 + cplx(p.omega, p.eta));
}

double alpha_param(cplx x) { return std::abs(std::acosh(x).real()); }

namespace {

double pole_alpha(const ConductivityParams& p, int m) {
  if (p.beta == 0.0) return INFINITY;
  return alpha_param(cplx(p.e_fermi, m * std::numbers::pi / p.beta));
}

double relax_alpha(const ConductivityParams& p) {
  return alpha_param(cplx(1.0 - std::abs(p.omega), p.eta));
}

// Boundary point of the ellipse E(a) shifted by omega + i eta.
cplx shifted_ellipse(const ConductivityParams& p, double a, double theta) {
  return cplx(p.omega + std::cosh(a) * std::cos(theta), p.eta + std::sinh(a) * std::sin(theta));
}

// alpha across the deformed cut: points below the real axis lie inside the
// penetration region and pick up the sign flip.
double signed_alpha(cplx x) {
  const double a = alpha_param(x);
  return x.imag() >= 0.0 ? a : -a;
}

std::pair<double, double> xstar_search(const ConductivityParams& p, double amax) {
  constexpr int samples = 2048;
  const double two_pi = 2.0 * std::numbers::pi;
  auto g = [&](double t) { return signed_alpha(shifted_ellipse(p, amax, t)); };
  int best = 0;
  double best_val = INFINITY;
  for (int i = 0; i < samples; ++i) {
    const double v = g(two_pi * i / samples);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  // golden section on the bracketing interval
  double lo = two_pi * (best - 1) / samples, hi = two_pi * (best + 1) / samples;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - phi * (hi - lo), d = lo + phi * (hi - lo);
  double gc = g(c), gd = g(d);
  while (hi - lo > 1e-10) {
    if (gc < gd) {
      hi = d;
      d = c;
      gd = gc;
      c = hi - phi * (hi - lo);
      gc = g(c);
    } else {
      lo = c;
      c = d;
      gc = gd;
      d = lo + phi * (hi - lo);
      gd = g(d);
    }
  }
  const double t = 0.5 * (lo + hi);
  const double v = g(t);
  if (v <= best_val) return {v, t};
  return {best_val, two_pi * best / samples};
}

// Relative slack for equalities between the two ellipse families, which
// hold exactly in the boundary cases (e.g. beta = 2 pi / eta at E_F = omega = 0).
constexpr double kTieTol = 1e-10;

bool le_tol(double a, double b) { return a <= b + kTieTol * std::max(std::abs(a), std::abs(b)); }

}  // namespace

double alpha_max(const ConductivityParams& p, int m) {
  return std::min(relax_alpha(p), pole_alpha(p, m));
}

std::pair<double, cplx> alpha_min_xstar(const ConductivityParams& p, int m) {
  const double amax = alpha_max(p, m);
  const auto [v, t] = xstar_search(p, amax);
  const cplx xs = shifted_ellipse(p, amax, t);
  return {std::min(v, pole_alpha(p, m)), xs};
}

Regime classify(const ConductivityParams& p, int m) {
  const double ar = relax_alpha(p), ap = pole_alpha(p, m);
  if (ar <= ap) return Regime::Relaxation;
  const double v = xstar_search(p, ap).first;
  if (le_tol(ap, v)) return Regime::Temperature;
  return Regime::Mixed;
}

DecayRates decay_rates(const ConductivityParams& p, int m) {
  p.validate();
  if (m < 1) throw ConfigError("pole multiplier must be >= 1");
  DecayRates r;
  r.alpha_max = alpha_max(p, m);
  const auto [amin, xs] = alpha_min_xstar(p, m);
  r.x_star = xs;
  r.klass = classify(p, m);
  r.alpha_min = r.klass == Regime::Temperature ? r.alpha_max : amin;
  r.alpha_diag = 0.5 * (r.alpha_max + r.alpha_min);
  r.alpha_anti = 0.5 * (r.alpha_max - r.alpha_min);
  r.lambda = p.beta == 0.0 ? p.eta : std::min(p.eta, 1.0 / p.beta);
  return r;
}

}  // namespace kubo
