#pragma once

#include <functional>
#include <utility>

#include "kubo/confunc.hpp"

namespace kubo {

// c_{k1 k2} for 0 <= k1, k2 <= kmax, row-major in k1.
struct CoeffMatrix {
  int kmax = 0;
  std::vector<cplx> coeffs;

  CoeffMatrix() = default;
  explicit CoeffMatrix(int k) : kmax(k), coeffs(std::size_t(k + 1) * (k + 1)) {}
  cplx& operator()(int k1, int k2) { return coeffs[std::size_t(k1) * (kmax + 1) + k2]; }
  cplx operator()(int k1, int k2) const { return coeffs[std::size_t(k1) * (kmax + 1) + k2]; }
  double abs_sum() const;
};

// Kept index pairs, sorted ascending by (k2, k1): the accumulation order.
struct IndexSet {
  std::vector<std::pair<int, int>> pairs;  // (k1, k2)
  std::vector<int> k1s;                    // K1, ascending
  std::vector<int> k2s;                    // K2, ascending

  static IndexSet from_pairs(std::vector<std::pair<int, int>> pairs);
  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  int max_k1() const { return k1s.empty() ? -1 : k1s.back(); }
  int max_k2() const { return k2s.empty() ? -1 : k2s.back(); }
  int max_sum() const;
  bool contains(int k1, int k2) const;
  // max over k2 of #{k1 : (k1, k2) in K}
  int band_width() const;
};

// Chebyshev-Lobatto nodes x_j = cos(pi j / n), j = 0..n.
std::vector<double> lobatto_nodes(int n);

// samples[j1 * (n+1) + j2] = f(x_j1, x_j2). DCT-I per axis.
CoeffMatrix transform2d(int n, const std::vector<cplx>& samples);
// 1D counterpart, same normalisation.
std::vector<cplx> transform1d(int n, const std::vector<cplx>& samples);

CoeffMatrix coeffs_of(const std::function<cplx(double, double)>& f, int kmax);
CoeffMatrix coeffs_of_F(const ConductivityParams& p, int kmax);

IndexSet truncation_set_rate(const DecayRates& rates, double tau);
// Drops ascending |c| while the dropped mass stays below eps.
IndexSet truncation_set_greedy(const CoeffMatrix& c, double eps, double* dropped = nullptr);
double tau_for_eps(const DecayRates& rates, double eps);
double coeff_bound(const DecayRates& rates, int k1, int k2);

cplx eval_series(const CoeffMatrix& c, const IndexSet& k, double e1, double e2);
// sum_k c_k T_k(x) by Clenshaw
cplx clenshaw(const cplx* c, int n, double x);

}  // namespace kubo
