#include "kubo/quadrature.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace kubo {

Method parse_method(const std::string& s) {
  if (s == "kpm") return Method::Kpm;
  if (s == "poles") return Method::Poles;
  if (s == "exact") return Method::Exact;
  throw ConfigError("unknown method '" + s + "' (expected kpm|poles|exact)");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::Kpm:
      return "kpm";
    case Method::Poles:
      return "poles";
    case Method::Exact:
      return "exact";
  }
  return "?";
}

MethodPlan make_method_plan(Method method, const ConductivityParams& p, const PlanOptions& opt) {
  p.validate();
  MethodPlan plan;
  plan.method = method;
  plan.params = p;
  plan.lowmem = opt.lowmem;
  if (method == Method::Kpm) {
    plan.coeffs = coeffs_of_F(p, opt.kmax);
    plan.kept = truncation_set_greedy(plan.coeffs, opt.eps, &plan.dropped);
    if (plan.kept.empty()) throw NumericalError("truncation removed every coefficient");
  } else if (method == Method::Poles) {
    const int k = opt.k_poles >= 0 ? opt.k_poles : optimal_k(p);
    plan.poles = make_pole_plan(p, k, opt.group_size, opt.eps, opt.resolvent_tol, opt.kmax);
  }
  return plan;
}

LocalConductivityResult MethodPlan::evaluate(const LocalSystem& sys) const {
  switch (method) {
    case Method::Kpm: {
      LocalConductivityResult r = local_conductivity_tensor(sys, coeffs, kept, lowmem);
      r.truncation_mass_dropped = dropped;
      return r;
    }
    case Method::Poles:
      return local_conductivity_via_poles_tensor(sys, *poles);
    case Method::Exact: {
      LocalConductivityResult r;
      r.sigma = local_conductivity_exact_tensor(sys, params);
      return r;
    }
  }
  throw ConfigError("unknown method");
}

int MethodPlan::r_recommended() const {
  auto half = [](int reach) { return std::max(1, (reach + 1) / 2); };
  if (method == Method::Kpm) return half(kept.max_sum() + 2);
  if (method == Method::Poles) {
    int reach = poles->remainder_kept.empty() ? 0 : poles->remainder_kept.max_sum() + 2;
    for (const PoleGroup& g : poles->groups) {
      if (g.kept.empty()) continue;
      int deg = 0;
      for (cplx z : g.poles) deg += resolvent_degree(z, poles->resolvent_tol);
      reach = std::max(reach, g.kept.max_sum() + 2 + 2 * deg);
    }
    return half(reach);
  }
  return 1;
}

QuadGrid trapezoid_grid(int q, const BravaisLattice& lat, int focal_layer, Vec2 offset) {
  if (q < 1) throw ConfigError("quadrature q must be >= 1");
  QuadGrid g;
  g.q = q;
  g.weight = lat.cell_area() / (double(q) * q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      const Vec2 f{double(i) / q + offset[0], double(j) / q + offset[1]};
      g.nodes.push_back({lat.to_cartesian(f), focal_layer});
    }
  return g;
}

ConductivityTensor integrate_configurations(const BilayerGeometry& geom, int q,
                                            const LocalEvaluator& eval, int threads, Vec2 offset) {
  if (threads < 1) throw ConfigError("threads must be >= 1");
  // sigma_1 is sampled over the cell of layer 2 and vice versa
  const QuadGrid g1 = trapezoid_grid(q, geom.lattice2, 1, offset);
  const QuadGrid g2 = trapezoid_grid(q, geom.lattice1, 2, offset);
  std::vector<ConfigShift> nodes = g1.nodes;
  nodes.insert(nodes.end(), g2.nodes.begin(), g2.nodes.end());

  ConductivityTensor out;
  out.nodes.resize(nodes.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < nodes.size(); i = next++) {
      try {
        const auto t0 = std::chrono::steady_clock::now();
        const LocalConductivityResult r = eval(nodes[i]);
        const auto t1 = std::chrono::steady_clock::now();
        NodeRecord& rec = out.nodes[i];
        rec.layer = nodes[i].focal_layer;
        rec.b = nodes[i].b;
        rec.sigma = r.sigma;
        rec.counters = r.counters;
        rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = nodes.size();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  out.nu = 1.0 / (geom.lattice1.cell_area() + geom.lattice2.cell_area());
  for (const NodeRecord& rec : out.nodes) {
    const double w = rec.layer == 1 ? g1.weight : g2.weight;
    for (int k = 0; k < 4; ++k) out.sigma[k] += w * rec.sigma[k];
    out.counters += rec.counters;
  }
  for (cplx& s : out.sigma) s *= out.nu;
  return out;
}

ConductivityTensor conductivity_integral(const BilayerGeometry& geom, const HamiltonianModel& model,
                                         const MethodPlan& plan, const IntegrationOptions& opt) {
  if (opt.r < 1) throw ConfigError("r must be >= 1");
  const SpectralWindow window = opt.window ? *opt.window : model_window(geom, model);
  const CutOut cut = CutOut::parallelogram(opt.r);
  return integrate_configurations(
      geom, opt.q,
      [&](const ConfigShift& shift) {
        return plan.evaluate(build_local_system(geom, model, cut, shift, window));
      },
      opt.threads, opt.offset);
}

}  // namespace kubo
