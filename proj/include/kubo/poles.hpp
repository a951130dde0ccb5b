#pragma once

#include <string>

#include "kubo/kpm.hpp"

namespace kubo {

struct PoleSet {
  int k = 0;
  std::vector<cplx> poles;  // ascending odd l in E_F + l pi i / beta
};

struct PoleGroup {
  std::vector<cplx> poles;
  double stability_ratio = 1.0;  // max|q| / min|q| on [-1, 1]
  CoeffMatrix coeffs;            // of P(E1, E2) / (E1 - E2 + omega + i eta)
  IndexSet kept;
  double weight_sup = 1.0;       // max |q|^2 on [-1, 1]
};

struct PolePlan {
  ConductivityParams params;
  PoleSet pole_set;
  int group_size = 1;
  std::vector<PoleGroup> groups;
  DecayRates remainder_rates;
  CoeffMatrix remainder_coeffs;
  IndexSet remainder_kept;
  double series_eps = 1e-3;
  double resolvent_tol = 1e-8;
  // e.g. when the resolvent degrees exceed the eta^{-3/2} inner-product
  // budget that makes the pole expansion pay off
  std::vector<std::string> warnings;
};

PoleSet pole_set(int k, const ConductivityParams& p);

// f_temp(E1, E2) minus the pole terms sum_z (1/beta) / ((E1 - z)(E2 - z)).
cplx remainder_eval(double e1, double e2, const ConductivityParams& p, int k);

int optimal_k(const ConductivityParams& p);

// max|q| / min|q| for q(E) = prod (E - z)^{-1} on a 1001-point grid.
double stability_ratio(const std::vector<cplx>& poles);

std::vector<PoleGroup> group_poles(const PoleSet& ps, int max_group);

// Degree of the truncated Chebyshev series of 1/(E - z) used by
// resolvent_apply; also the bound on its matvec count.
int resolvent_degree(cplx z, double tol);
int resolvent_degree_cap(cplx z);

// (H - z)^{-1} v by the closed-form Chebyshev series of 1/(E - z).
Vector resolvent_apply(const SparseOperator& h, cplx z, const Vector& v, double tol,
                       OpCounters* counters = nullptr);

// q(H) v for q(E) = prod (E - z)^{-1}: resolvent_apply for one pole, an
// adaptively sampled Chebyshev series of q for a group.
Vector apply_pole_weight(const SparseOperator& h, const std::vector<cplx>& poles, const Vector& v,
                         double tol, OpCounters* counters = nullptr);

// Splits eps: half to the remainder series, half spread evenly over the
// pole groups, each group's budget divided by its weight amplification.
PolePlan make_pole_plan(const ConductivityParams& p, int k, int group_size, double eps,
                        double resolvent_tol = 1e-8, int kmax = 500);

// Algorithm 2.
EntryResult local_conductivity_via_poles(const SparseOperator& h, const SparseOperator& mp,
                                         const SparseOperator& mpp, const PolePlan& plan,
                                         int seed);

LocalConductivityResult local_conductivity_via_poles_tensor(const LocalSystem& sys,
                                                            const PolePlan& plan);

}  // namespace kubo
