#pragma once

#include <array>
#include <iosfwd>
#include <optional>

#include "kubo/geometry.hpp"
#include "kubo/simd.hpp"

namespace kubo {

// Compressed-row complex operator.
struct SparseOperator {
  int n = 0;
  std::vector<std::int64_t> row_offsets{0};
  std::vector<std::int32_t> column_indices;
  std::vector<cplx> values;
  bool hermitian = true;

  std::int64_t nnz() const { return static_cast<std::int64_t>(values.size()); }
  cplx at(int i, int j) const;
  simd::CsrView view() const;
  // max |a_ij - conj(a_ji)|; also checks structural symmetry
  double hermiticity_defect() const;
};

void multiply(const SparseOperator& a, const Vector& x, Vector& y);

struct SpectralWindow {
  double e_min = -1.0;
  double e_max = 1.0;

  double center() const { return 0.5 * (e_max + e_min); }
  double half_width() const { return 0.5 * (e_max - e_min); }
  double to_scaled(double e) const { return (e - center()) / half_width(); }
  double to_unscaled(double x) const { return center() + half_width() * x; }
};

struct HamiltonianModel {
  double r_cut = 1.7320508075688772;
};

double coupling(double d, const HamiltonianModel& model = {});

SparseOperator assemble(const SiteList& sites, const HamiltonianModel& model = {});

// Gershgorin discs; a degenerate window is widened by 1e-12.
SpectralWindow spectral_bounds(const SparseOperator& a);

// A window enclosing the spectrum of every finite cut-out and every shift b:
// Gershgorin row sums maximized over all local environments of either layer
// (sampled densely over the opposite cell, plus a 2% margin). Runs that must
// be comparable across r or b share this window.
SpectralWindow model_window(const BilayerGeometry& geom, const HamiltonianModel& model = {});

SparseOperator rescale(const SparseOperator& a, const SpectralWindow& w);

// M_p[i][j] = i (x_j - x_i)_p A[i][j], p in {1, 2}.
SparseOperator velocity(const SparseOperator& a, const SiteList& sites, int p);

void write_matrix_market(const SparseOperator& a, std::ostream& os);

// Everything a local-conductivity evaluation needs for one configuration.
struct LocalSystem {
  SiteList sites;
  SpectralWindow window;
  SparseOperator h;                  // rescaled
  std::array<SparseOperator, 2> m;   // velocity operators of the rescaled h
  int seed() const { return sites.seed_index; }
  int size() const { return sites.size(); }
};

// window defaults to model_window(geom, model).
LocalSystem build_local_system(const BilayerGeometry& geom, const HamiltonianModel& model,
                               const CutOut& cut, const ConfigShift& shift,
                               std::optional<SpectralWindow> window = std::nullopt);

}  // namespace kubo
