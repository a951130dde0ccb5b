#pragma once

#include <array>

#include "kubo/cheb2d.hpp"
#include "kubo/hamiltonian.hpp"

namespace kubo {

struct OpCounters {
  std::int64_t matvecs = 0;            // products with H (resolvent polynomials included)
  std::int64_t inner_products = 0;
  std::int64_t resolvent_solves = 0;
  std::int64_t peak_cached_vectors = 0;
  std::int64_t velocity_products = 0;  // products with M_p, M_p'

  // sums the counts, takes the max of the peaks
  OpCounters& operator+=(const OpCounters& o);
};

// T_0 v0, T_1 v0, ... by the three-term recurrence; one matvec per advance().
class ChebyshevSequence {
 public:
  ChebyshevSequence(const SparseOperator& h, Vector v0, OpCounters* counters = nullptr);
  int index() const { return k_; }
  const Vector& current() const { return cur_; }
  void advance();

 private:
  const SparseOperator* h_;
  Vector prev_, cur_;
  int k_ = 0;
  OpCounters* counters_;
};

// All of T_0 v0 .. T_kmax v0 (for tests and small problems).
std::vector<Vector> cheb_apply_sequence(const SparseOperator& h, const Vector& v0, int kmax,
                                        OpCounters* counters = nullptr);

struct EntryResult {
  cplx value{0.0, 0.0};
  OpCounters counters;
};

struct LocalConductivityResult {
  std::array<cplx, 4> sigma{};               // (p, p') row-major
  std::array<OpCounters, 4> entry_counters;  // per tensor entry
  OpCounters counters;                       // whole tensor
  double truncation_mass_dropped = 0.0;

  cplx& operator()(int p, int pp) { return sigma[2 * (p - 1) + (pp - 1)]; }
  cplx operator()(int p, int pp) const { return sigma[2 * (p - 1) + (pp - 1)]; }
};

Vector unit_vector(int n, int i);

// Algorithm 1: sum over K of c_{k1k2} <M_p T_k1(H) e | T_k2(H) M_p' e>.
EntryResult local_conductivity(const SparseOperator& h, const SparseOperator& mp,
                               const SparseOperator& mpp, const CoeffMatrix& c, const IndexSet& k,
                               int seed);

// Algorithm 3: ascending k2 loop with a three-vector w window; v vectors are
// produced on demand and discarded after their last use, so a wedge-shaped
// K only keeps one band of v vectors alive.
EntryResult local_conductivity_lowmem(const SparseOperator& h, const SparseOperator& mp,
                                      const SparseOperator& mpp, const CoeffMatrix& c,
                                      const IndexSet& k, int seed);

// The same sums with general starting vectors:
// sum c <M_p T_k1(H) u0 | T_k2(H) w0>.
cplx chebyshev_bilinear(const SparseOperator& h, const SparseOperator& mp, const Vector& u0,
                        const Vector& w0, const CoeffMatrix& c, const IndexSet& k,
                        OpCounters& counters, bool lowmem = false);

// Weight q(E) = prod_z (E - z)^{-1} over `poles` (one pole or a group):
// sum c <M_p T_k1(H) q(H)^* e | T_k2(H) q(H) M_p' e>.
EntryResult weighted_local_conductivity(const SparseOperator& h, const SparseOperator& mp,
                                        const SparseOperator& mpp, const CoeffMatrix& c,
                                        const IndexSet& k, int seed,
                                        const std::vector<cplx>& poles, double resolvent_tol);

// All four (p, p') entries.
LocalConductivityResult local_conductivity_tensor(const LocalSystem& sys, const CoeffMatrix& c,
                                                  const IndexSet& k, bool lowmem = false);

}  // namespace kubo
