#pragma once

#include <json.hpp>
#include <optional>

#include "kubo/quadrature.hpp"

namespace kubo {

struct RunConfig {
  // geometry
  std::string lattice = "hexagonal";
  double twist_degrees = 2.5;
  double interlayer_gap = 1.0;
  // model
  double r_cut = 1.7320508075688772;
  // params
  ConductivityParams params{1.0, 0.5, 0.0, 0.0};
  // run
  int r = 0;  // 0: use the plan's recommended radius
  int q = 4;
  Method method = Method::Kpm;
  double eps = 1e-3;
  int kmax = 500;
  int k_poles = -1;  // -1: auto
  int group_size = 1;
  int threads = 1;
  double resolvent_tol = 1e-8;
  bool lowmem = false;
  Vec2 b{0.0, 0.0};
  int focal_layer = 1;
  // bench sweep; unset means the single configured value, an explicit empty
  // list gives an empty sweep
  std::optional<std::vector<double>> bench_betas;
  std::optional<std::vector<double>> bench_etas;
  std::optional<std::vector<Method>> bench_methods;

  void validate() const;
  BilayerGeometry geometry() const;
  HamiltonianModel model() const { return {r_cut}; }
  PlanOptions plan_options() const;
};

// Strict: unknown keys and wrong types are ConfigErrors naming the field.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});
nlohmann::json config_to_json(const RunConfig& c);

}  // namespace kubo
