#pragma once

#include <string>
#include <utility>

#include "kubo/common.hpp"

namespace kubo {

struct ConductivityParams {
  double beta = 1.0;  // 0 is allowed: infinite temperature, F == 0
  double eta = 0.5;
  double omega = 0.0;
  double e_fermi = 0.0;

  void validate() const;
};

enum class Regime { Relaxation, Mixed, Temperature };
std::string regime_name(Regime r);

struct DecayRates {
  double alpha_diag = 0.0;
  double alpha_anti = 0.0;
  double alpha_max = 0.0;
  double alpha_min = 0.0;
  Regime klass = Regime::Relaxation;
  cplx x_star{0.0, 0.0};
  double lambda = 0.0;  // min(eta, 1/beta)
};

double fermi(double e, const ConductivityParams& p);

// (f(E1) - f(E2)) / (E1 - E2), with the derivative at E1 == E2.
cplx f_temp(cplx e1, cplx e2, const ConductivityParams& p);

cplx F_zeta(cplx e1, cplx e2, const ConductivityParams& p);

// log|x + sqrt(x^2 - 1)| on the branch with modulus >= 1.
double alpha_param(cplx x);

// The pole multiplier m moves the Fermi pole from E_F + i pi/beta to
// E_F + i m pi/beta (used for the pole-expansion remainder).
double alpha_max(const ConductivityParams& p, int m = 1);
std::pair<double, cplx> alpha_min_xstar(const ConductivityParams& p, int m = 1);
Regime classify(const ConductivityParams& p, int m = 1);
DecayRates decay_rates(const ConductivityParams& p, int m = 1);

}  // namespace kubo
