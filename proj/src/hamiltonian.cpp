#include "kubo/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace kubo {

cplx SparseOperator::at(int i, int j) const {
  const auto b = column_indices.begin() + row_offsets[i];
  const auto e = column_indices.begin() + row_offsets[i + 1];
  const auto it = std::lower_bound(b, e, j);
  if (it == e || *it != j) return 0.0;
  return values[it - column_indices.begin()];
}

simd::CsrView SparseOperator::view() const {
  return {n, row_offsets.data(), column_indices.data(), values.data()};
}

double SparseOperator::hermiticity_defect() const {
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (std::int64_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      const int j = column_indices[k];
      const cplx back = at(j, i);
      if (back == 0.0 && values[k] != 0.0) return INFINITY;  // structural asymmetry
      worst = std::max(worst, std::abs(values[k] - std::conj(back)));
    }
  return worst;
}

void multiply(const SparseOperator& a, const Vector& x, Vector& y) {
  if (static_cast<int>(x.size()) != a.n) throw ConfigError("dimension mismatch in multiply");
  y.resize(a.n);
  simd::kernels().spmv(a.view(), x.data(), y.data());
}

double coupling(double d, const HamiltonianModel& model) {
  const double rc2 = model.r_cut * model.r_cut;
  const double d2 = d * d;
  if (d2 >= rc2) return 0.0;
  return std::exp(-d2 / (rc2 - d2));
}

namespace {

double dist3(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

SparseOperator assemble(const SiteList& sites, const HamiltonianModel& model) {
  const int n = sites.size();
  if (n == 0) throw ConfigError("assemble: empty site list");
  // in-plane cell list with bin size r_cut
  const double h = model.r_cut;
  std::map<std::pair<long, long>, std::vector<int>> bins;
  auto key = [h](const Vec3& p) {
    return std::pair<long, long>{std::lround(std::floor(p[0] / h)), std::lround(std::floor(p[1] / h))};
  };
  for (int i = 0; i < n; ++i) bins[key(sites.positions[i])].push_back(i);

  SparseOperator a;
  a.n = n;
  a.row_offsets.assign(1, 0);
  std::vector<std::pair<int, double>> row;
  for (int i = 0; i < n; ++i) {
    row.clear();
    const auto [bx, by] = key(sites.positions[i]);
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy) {
        const auto it = bins.find({bx + dx, by + dy});
        if (it == bins.end()) continue;
        for (int j : it->second) {
          const double c = coupling(dist3(sites.positions[i], sites.positions[j]), model);
          if (c != 0.0) row.emplace_back(j, c);
        }
      }
    std::sort(row.begin(), row.end());
    for (const auto& [j, c] : row) {
      a.column_indices.push_back(j);
      a.values.emplace_back(c, 0.0);
    }
    a.row_offsets.push_back(static_cast<std::int64_t>(a.values.size()));
  }
  return a;
}

SpectralWindow spectral_bounds(const SparseOperator& a) {
  double lo = INFINITY, hi = -INFINITY;
  for (int i = 0; i < a.n; ++i) {
    double diag = 0.0, off = 0.0;
    for (std::int64_t k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
      if (a.column_indices[k] == i)
        diag = a.values[k].real();
      else
        off += std::abs(a.values[k]);
    }
    lo = std::min(lo, diag - off);
    hi = std::max(hi, diag + off);
  }
  if (hi - lo < 1e-12) {
    lo -= 1e-12;
    hi += 1e-12;
  }
  return {lo, hi};
}

SpectralWindow model_window(const BilayerGeometry& geom, const HamiltonianModel& model) {
  const double reach = model.r_cut + 2.0;
  // Sum of |coupling| from a site at in-plane offset x to lattice `lat` at height dz.
  auto lattice_sum = [&](const BravaisLattice& lat, Vec2 x, double dz, bool skip_origin) {
    const Vec2 f = lat.to_fractional(x);
    const long span = static_cast<long>(std::ceil(reach / std::sqrt(lat.cell_area()))) + 3;
    double s = 0.0;
    for (long m0 = std::lround(f[0]) - span; m0 <= std::lround(f[0]) + span; ++m0)
      for (long m1 = std::lround(f[1]) - span; m1 <= std::lround(f[1]) + span; ++m1) {
        const Vec2 y = lat.to_cartesian({double(m0), double(m1)});
        const double dx = y[0] - x[0], dy = y[1] - x[1];
        const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
        if (skip_origin && d == 0.0) continue;
        s += coupling(d, model);
      }
    return s;
  };
  double worst = 0.0;
  const double self = coupling(0.0, model);
  constexpr int samples = 96;
  for (int layer = 1; layer <= 2; ++layer) {
    const BravaisLattice& own = geom.lattice(layer);
    const BravaisLattice& other = geom.lattice(3 - layer);
    const double intra = lattice_sum(own, {0.0, 0.0}, 0.0, true);
    double inter = 0.0;
    for (int i = 0; i < samples; ++i)
      for (int j = 0; j < samples; ++j) {
        const Vec2 x = other.to_cartesian({double(i) / samples, double(j) / samples});
        inter = std::max(inter, lattice_sum(other, x, geom.interlayer_gap, false));
      }
    worst = std::max(worst, intra + inter);
  }
  worst *= 1.02;
  return {self - worst, self + worst};
}

SparseOperator rescale(const SparseOperator& a, const SpectralWindow& w) {
  if (!(w.e_max > w.e_min)) throw ConfigError("rescale: empty spectral window");
  const double s = 2.0 / (w.e_max - w.e_min);
  const double c = w.center();
  SparseOperator out;
  out.n = a.n;
  out.hermitian = a.hermitian;
  out.row_offsets.assign(1, 0);
  for (int i = 0; i < a.n; ++i) {
    bool has_diag = false;
    for (std::int64_t k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
      const int j = a.column_indices[k];
      if (!has_diag && j > i) {
        out.column_indices.push_back(i);
        out.values.emplace_back(-s * c, 0.0);
        has_diag = true;
      }
      out.column_indices.push_back(j);
      out.values.push_back(j == i ? s * (a.values[k] - c) : s * a.values[k]);
      if (j == i) has_diag = true;
    }
    if (!has_diag) {
      out.column_indices.push_back(i);
      out.values.emplace_back(-s * c, 0.0);
    }
    out.row_offsets.push_back(static_cast<std::int64_t>(out.values.size()));
  }
  return out;
}

SparseOperator velocity(const SparseOperator& a, const SiteList& sites, int p) {
  if (a.n != sites.size()) throw ConfigError("velocity: dimension mismatch");
  if (p != 1 && p != 2) throw ConfigError("velocity: direction must be 1 or 2");
  SparseOperator m;
  m.n = a.n;
  m.row_offsets.assign(1, 0);
  for (int i = 0; i < a.n; ++i) {
    for (std::int64_t k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
      const int j = a.column_indices[k];
      if (j == i) continue;
      const double dx = sites.positions[j][p - 1] - sites.positions[i][p - 1];
      m.column_indices.push_back(j);
      m.values.push_back(cplx(0.0, dx) * a.values[k]);
    }
    m.row_offsets.push_back(static_cast<std::int64_t>(m.values.size()));
  }
  return m;
}

void write_matrix_market(const SparseOperator& a, std::ostream& os) {
  os << "%%MatrixMarket matrix coordinate complex general\n";
  os << a.n << ' ' << a.n << ' ' << a.nnz() << '\n';
  os.precision(17);
  for (int i = 0; i < a.n; ++i)
    for (std::int64_t k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k)
      os << i + 1 << ' ' << a.column_indices[k] + 1 << ' ' << a.values[k].real() << ' '
         << a.values[k].imag() << '\n';
}

LocalSystem build_local_system(const BilayerGeometry& geom, const HamiltonianModel& model,
                               const CutOut& cut, const ConfigShift& shift,
                               std::optional<SpectralWindow> window) {
  LocalSystem sys;
  sys.sites = enumerate_sites(geom, cut, shift);
  sys.window = window ? *window : model_window(geom, model);
  sys.h = rescale(assemble(sys.sites, model), sys.window);
  sys.m = {velocity(sys.h, sys.sites, 1), velocity(sys.h, sys.sites, 2)};
  return sys;
}

}  // namespace kubo
