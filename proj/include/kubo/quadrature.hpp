#pragma once

#include <functional>
#include <optional>

#include "kubo/oracle.hpp"
#include "kubo/poles.hpp"

namespace kubo {

enum class Method { Kpm, Poles, Exact };
Method parse_method(const std::string& s);
std::string method_name(Method m);

// Everything about a local-conductivity evaluation that does not depend on
// the configuration: coefficients, truncation sets, pole plan.
struct MethodPlan {
  Method method = Method::Kpm;
  ConductivityParams params;
  bool lowmem = false;
  CoeffMatrix coeffs;  // kpm
  IndexSet kept;       // kpm
  double dropped = 0.0;
  std::optional<PolePlan> poles;

  LocalConductivityResult evaluate(const LocalSystem& sys) const;
  // ceil(max (k1 + k2 + 2) / 2) over every truncation set; for the pole
  // path the resolvent polynomial degrees extend the reach.
  int r_recommended() const;
};

struct PlanOptions {
  double eps = 1e-3;
  int kmax = 500;
  int k_poles = -1;  // -1: optimal_k
  int group_size = 1;
  double resolvent_tol = 1e-8;
  bool lowmem = false;
};

MethodPlan make_method_plan(Method method, const ConductivityParams& p, const PlanOptions& opt);

struct QuadGrid {
  int q = 1;
  std::vector<ConfigShift> nodes;
  double weight = 0.0;
};

// Nodes A (beta + offset) for beta in {0, 1/q, ..., (q-1)/q}^2.
QuadGrid trapezoid_grid(int q, const BravaisLattice& lat, int focal_layer = 1, Vec2 offset = {0, 0});

struct NodeRecord {
  int layer = 1;
  Vec2 b{0, 0};
  std::array<cplx, 4> sigma{};
  OpCounters counters;
  double wall_ms = 0.0;
};

struct ConductivityTensor {
  std::array<cplx, 4> sigma{};
  double nu = 0.0;
  std::vector<NodeRecord> nodes;  // layer 1 nodes, then layer 2
  OpCounters counters;

  cplx operator()(int p, int pp) const { return sigma[2 * (p - 1) + (pp - 1)]; }
};

using LocalEvaluator = std::function<LocalConductivityResult(const ConfigShift&)>;

// nu (sum_{b in Gamma_2} w sigma_1[b] + sum_{b in Gamma_1} w sigma_2[b]); the
// reduction runs in node order whatever the thread count.
ConductivityTensor integrate_configurations(const BilayerGeometry& geom, int q,
                                            const LocalEvaluator& eval, int threads = 1,
                                            Vec2 offset = {0, 0});

struct IntegrationOptions {
  int r = 4;
  int q = 4;
  int threads = 1;
  Vec2 offset{0, 0};
  std::optional<SpectralWindow> window;  // default: model_window
};

ConductivityTensor conductivity_integral(const BilayerGeometry& geom, const HamiltonianModel& model,
                                         const MethodPlan& plan, const IntegrationOptions& opt);

}  // namespace kubo
