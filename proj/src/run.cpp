#include "kubo/run.hpp"

#include "kubo/simd.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace kubo {

using nlohmann::json;

namespace {

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

json sigma_json(const std::array<cplx, 4>& s) {
  json out = json::array();
  for (cplx z : s) out.push_back(cplx_json(z));
  return out;
}

json params_json(const ConductivityParams& p) {
  return {{"beta", p.beta}, {"eta", p.eta}, {"omega", p.omega}, {"e_fermi", p.e_fermi}};
}

json rates_json(const DecayRates& r) {
  return {{"alpha_diag", r.alpha_diag}, {"alpha_anti", r.alpha_anti}, {"alpha_max", r.alpha_max},
          {"alpha_min", r.alpha_min},   {"class", regime_name(r.klass)}, {"x_star", cplx_json(r.x_star)},
          {"lambda", r.lambda}};
}

int radius_for(const RunConfig& c, const MethodPlan& plan) { return c.r > 0 ? c.r : plan.r_recommended(); }

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

json warnings_json(const MethodPlan& plan) {
  json w = json::array();
  if (plan.poles)
    for (const auto& s : plan.poles->warnings) w.push_back(s);
  return w;
}

}  // namespace

json counters_json(const OpCounters& c) {
  return {{"matvecs", c.matvecs},
          {"inner_products", c.inner_products},
          {"resolvent_solves", c.resolvent_solves},
          {"peak_cached_vectors", c.peak_cached_vectors},
          {"velocity_products", c.velocity_products}};
}

json run_rates(const RunConfig& c) {
  c.validate();
  c.params.validate();
  const DecayRates r = decay_rates(c.params);
  json out = rates_json(r);
  out["params"] = params_json(c.params);
  return out;
}

CoeffsOutput run_coeffs(const RunConfig& c) {
  c.validate();
  c.params.validate();
  const CoeffMatrix m = coeffs_of_F(c.params, c.kmax);
  double cmax = 0.0;
  for (cplx z : m.coeffs) cmax = std::max(cmax, std::abs(z));
  CoeffsOutput out;
  std::ostringstream os;
  os << "k1,k2,re,im,normalized_abs\n";
  std::int64_t above3 = 0, above6 = 0;
  for (int k1 = 0; k1 <= m.kmax; ++k1) {
    for (int k2 = 0; k2 <= m.kmax; ++k2) {
      const cplx z = m(k1, k2);
      const double a = cmax > 0.0 ? std::abs(z) / cmax : 0.0;
      above3 += a > 1e-3;
      above6 += a > 1e-6;
      os << k1 << ',' << k2 << ',' << fmt(z.real()) << ',' << fmt(z.imag()) << ',' << fmt(a) << '\n';
    }
  }
  double dropped = 0.0;
  const IndexSet kept = truncation_set_greedy(m, c.eps, &dropped);
  out.csv = os.str();
  out.summary = {{"params", params_json(c.params)},
                 {"kmax", m.kmax},
                 {"max_abs", cmax},
                 {"count_above_1e-3", above3},
                 {"count_above_1e-6", above6},
                 {"eps", c.eps},
                 {"kept", kept.size()},
                 {"kept_max_sum", kept.empty() ? 0 : kept.max_sum()},
                 {"dropped_mass", dropped},
                 {"rates", rates_json(decay_rates(c.params))}};
  if (c.method == Method::Poles) {
    // kept counts of the rational path, for comparison with "kept"
    const PolePlan pp = *make_method_plan(c.method, c.params, c.plan_options()).poles;
    std::size_t in_groups = 0;
    for (const PoleGroup& g : pp.groups) in_groups += g.kept.size();
    out.summary["pole_path"] = {{"k", pp.pole_set.k},
                                {"groups", pp.groups.size()},
                                {"kept_remainder", pp.remainder_kept.size()},
                                {"kept_groups", in_groups},
                                {"kept_total", pp.remainder_kept.size() + in_groups}};
  }
  return out;
}

json run_sigma_local(const RunConfig& c) {
  c.validate();
  const MethodPlan plan = make_method_plan(c.method, c.params, c.plan_options());
  const int r = radius_for(c, plan);
  const BilayerGeometry geom = c.geometry();
  const LocalSystem sys =
      build_local_system(geom, c.model(), CutOut::parallelogram(r), ConfigShift{c.b, c.focal_layer});
  const auto t0 = std::chrono::steady_clock::now();
  const LocalConductivityResult res = plan.evaluate(sys);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  json per_entry = json::array();
  for (const auto& e : res.entry_counters) per_entry.push_back(counters_json(e));
  return {{"method", method_name(c.method)},
          {"params", params_json(c.params)},
          {"rates", rates_json(decay_rates(c.params))},
          {"class", regime_name(decay_rates(c.params).klass)},
          {"r", r},
          {"r_recommended", plan.r_recommended()},
          {"b", {c.b[0], c.b[1]}},
          {"focal_layer", c.focal_layer},
          {"n_sites", sys.size()},
          {"window", {sys.window.e_min, sys.window.e_max}},
          {"sigma", sigma_json(res.sigma)},
          {"counters", counters_json(res.counters)},
          {"entry_counters", per_entry},
          {"truncation_mass_dropped", res.truncation_mass_dropped},
          {"simd", simd::isa_name(simd::active_isa())},
          {"wall_ms", ms},
          {"warnings", warnings_json(plan)}};
}

namespace {

ConductivityTensor integrate(const RunConfig& c, const MethodPlan& plan, int r) {
  IntegrationOptions opt;
  opt.r = r;
  opt.q = c.q;
  opt.threads = c.threads;
  return conductivity_integral(c.geometry(), c.model(), plan, opt);
}

}  // namespace

IntegrateOutput run_sigma_integrate(const RunConfig& c) {
  c.validate();
  const MethodPlan plan = make_method_plan(c.method, c.params, c.plan_options());
  const int r = radius_for(c, plan);
  const auto t0 = std::chrono::steady_clock::now();
  const ConductivityTensor t = integrate(c, plan, r);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  IntegrateOutput out;
  json nodes = json::array();
  std::ostringstream os;
  os << "layer,b_x,b_y,s11_re,s11_im,s12_re,s12_im,s21_re,s21_im,s22_re,s22_im,matvecs,inner_products,"
        "solves,wall_ms\n";
  for (const NodeRecord& n : t.nodes) {
    nodes.push_back({{"layer", n.layer},
                     {"b", {n.b[0], n.b[1]}},
                     {"sigma", sigma_json(n.sigma)},
                     {"counters", counters_json(n.counters)},
                     {"wall_ms", n.wall_ms}});
    os << n.layer << ',' << fmt(n.b[0]) << ',' << fmt(n.b[1]);
    for (cplx z : n.sigma) os << ',' << fmt(z.real()) << ',' << fmt(z.imag());
    os << ',' << n.counters.matvecs << ',' << n.counters.inner_products << ','
       << n.counters.resolvent_solves << ',' << fmt(n.wall_ms) << '\n';
  }
  out.csv = os.str();
  out.doc = {{"method", method_name(c.method)},
             {"params", params_json(c.params)},
             {"rates", rates_json(decay_rates(c.params))},
             {"r", r},
             {"r_recommended", plan.r_recommended()},
             {"q", c.q},
             {"threads", c.threads},
             {"nu", t.nu},
             {"sigma", sigma_json(t.sigma)},
             {"counters", counters_json(t.counters)},
             {"nodes", nodes},
             {"simd", simd::isa_name(simd::active_isa())},
             {"wall_ms", ms},
             {"warnings", warnings_json(plan)}};
  return out;
}

std::string run_bench(const RunConfig& c) {
  c.validate();
  std::ostringstream os;
  os << kBenchHeader << '\n';
  const std::vector<Method> methods = c.bench_methods.value_or(std::vector<Method>{c.method});
  const std::vector<double> betas = c.bench_betas.value_or(std::vector<double>{c.params.beta});
  const std::vector<double> etas = c.bench_etas.value_or(std::vector<double>{c.params.eta});
  for (Method m : methods) {
    for (double beta : betas) {
      for (double eta : etas) {
        RunConfig rc = c;
        rc.method = m;
        rc.params.beta = beta;
        rc.params.eta = eta;
        const MethodPlan plan = make_method_plan(m, rc.params, rc.plan_options());
        const int r = radius_for(rc, plan);
        const auto t0 = std::chrono::steady_clock::now();
        const ConductivityTensor t = integrate(rc, plan, r);
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        const int n = 2 * (2 * r + 1) * (2 * r + 1);
        os << method_name(m) << ',' << fmt(beta) << ',' << fmt(eta) << ',' << n << ',' << t.counters.matvecs
           << ',' << t.counters.inner_products << ',' << t.counters.resolvent_solves << ',' << fmt(ms) << ','
           << fmt(t.sigma[0].real()) << ',' << fmt(t.sigma[0].imag()) << '\n';
      }
    }
  }
  return os.str();
}

}  // namespace kubo
