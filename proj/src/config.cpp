#include "kubo/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace kubo {

using nlohmann::json;

void RunConfig::validate() const {
  if (lattice != "hexagonal" && lattice != "square")
    throw ConfigError("geometry.lattice: expected hexagonal|square");
  if (!std::isfinite(twist_degrees)) throw ConfigError("geometry.twist_degrees: must be finite");
  if (!(interlayer_gap >= 0.0)) throw ConfigError("geometry.interlayer_gap: must be >= 0");
  if (!(r_cut > 0.0)) throw ConfigError("model.r_cut: must be > 0");
  if (!(params.beta >= 0.0) || !std::isfinite(params.beta)) throw ConfigError("params.beta: must be >= 0");
  if (!(params.eta > 0.0) || !std::isfinite(params.eta)) throw ConfigError("params.eta: must be > 0");
  if (!std::isfinite(params.omega)) throw ConfigError("params.omega: must be finite");
  if (!std::isfinite(params.e_fermi)) throw ConfigError("params.e_fermi: must be finite");
  if (r < 0) throw ConfigError("run.r: must be >= 1 (or 0 for auto)");
  if (q < 1) throw ConfigError("run.q: must be >= 1");
  if (!(eps >= 0.0)) throw ConfigError("run.eps: must be >= 0");
  if (kmax < 1) throw ConfigError("run.kmax: must be >= 1");
  if (k_poles < -1) throw ConfigError("run.k_poles: must be auto or >= 0");
  if (group_size < 1) throw ConfigError("run.group_size: must be >= 1");
  if (threads < 1) throw ConfigError("run.threads: must be >= 1");
  if (!(resolvent_tol > 0.0)) throw ConfigError("run.resolvent_tol: must be > 0");
  if (focal_layer != 1 && focal_layer != 2) throw ConfigError("run.focal_layer: must be 1 or 2");
  if (bench_betas)
    for (double v : *bench_betas)
      if (!(v >= 0.0)) throw ConfigError("bench.betas: entries must be >= 0");
  if (bench_etas)
    for (double v : *bench_etas)
      if (!(v > 0.0)) throw ConfigError("bench.etas: entries must be > 0");
}

BilayerGeometry RunConfig::geometry() const {
  const BravaisLattice base = lattice == "square" ? BravaisLattice::square() : BravaisLattice::hexagonal();
  return make_twisted_pair(base, twist_degrees, interlayer_gap);
}

PlanOptions RunConfig::plan_options() const {
  PlanOptions o;
  o.eps = eps;
  o.kmax = kmax;
  o.k_poles = k_poles;
  o.group_size = group_size;
  o.resolvent_tol = resolvent_tol;
  o.lowmem = lowmem;
  return o;
}

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError(where + "." + key + ": unknown field");
}

template <class T>
void read(const json& obj, const std::string& where, const char* key, T& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  const std::string name = where + "." + key;
  if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) throw ConfigError(name + ": expected a number");
    out = v.get<double>();
  } else if constexpr (std::is_same_v<T, int>) {
    if (!v.is_number_integer()) throw ConfigError(name + ": expected an integer");
    out = v.get<int>();
  } else if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError(name + ": expected true/false");
    out = v.get<bool>();
  } else {
    if (!v.is_string()) throw ConfigError(name + ": expected a string");
    out = v.get<std::string>();
  }
}

std::vector<double> read_numbers(const json& v, const std::string& name) {
  if (!v.is_array()) throw ConfigError(name + ": expected an array of numbers");
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number()) throw ConfigError(name + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

RunConfig config_from_json(const json& j, RunConfig c) {
  check_keys(j, "config", {"geometry", "model", "params", "run", "bench"});
  if (j.contains("geometry")) {
    const json& g = j["geometry"];
    check_keys(g, "geometry", {"lattice", "twist_degrees", "interlayer_gap"});
    read(g, "geometry", "lattice", c.lattice);
    read(g, "geometry", "twist_degrees", c.twist_degrees);
    read(g, "geometry", "interlayer_gap", c.interlayer_gap);
  }
  if (j.contains("model")) {
    check_keys(j["model"], "model", {"r_cut"});
    read(j["model"], "model", "r_cut", c.r_cut);
  }
  if (j.contains("params")) {
    const json& p = j["params"];
    check_keys(p, "params", {"beta", "eta", "omega", "e_fermi"});
    read(p, "params", "beta", c.params.beta);
    read(p, "params", "eta", c.params.eta);
    read(p, "params", "omega", c.params.omega);
    read(p, "params", "e_fermi", c.params.e_fermi);
  }
  if (j.contains("run")) {
    const json& r = j["run"];
    check_keys(r, "run", {"r", "q", "method", "eps", "kmax", "k_poles", "group_size", "threads",
                          "resolvent_tol", "lowmem", "b", "focal_layer"});
    read(r, "run", "r", c.r);
    read(r, "run", "q", c.q);
    if (r.contains("method")) {
      std::string m;
      read(r, "run", "method", m);
      try {
        c.method = parse_method(m);
      } catch (const ConfigError& e) {
        throw ConfigError(std::string("run.method: ") + e.what());
      }
    }
    read(r, "run", "eps", c.eps);
    read(r, "run", "kmax", c.kmax);
    if (r.contains("k_poles")) {
      if (r["k_poles"].is_string()) {
        if (r["k_poles"] != "auto") throw ConfigError("run.k_poles: expected \"auto\" or an integer");
        c.k_poles = -1;
      } else {
        read(r, "run", "k_poles", c.k_poles);
      }
    }
    read(r, "run", "group_size", c.group_size);
    read(r, "run", "threads", c.threads);
    read(r, "run", "resolvent_tol", c.resolvent_tol);
    read(r, "run", "lowmem", c.lowmem);
    if (r.contains("b")) {
      const std::vector<double> b = read_numbers(r["b"], "run.b");
      if (b.size() != 2) throw ConfigError("run.b: expected two numbers");
      c.b = {b[0], b[1]};
    }
    read(r, "run", "focal_layer", c.focal_layer);
  }
  if (j.contains("bench")) {
    const json& b = j["bench"];
    check_keys(b, "bench", {"betas", "etas", "methods"});
    if (b.contains("betas")) c.bench_betas = read_numbers(b["betas"], "bench.betas");
    if (b.contains("etas")) c.bench_etas = read_numbers(b["etas"], "bench.etas");
    if (b.contains("methods")) {
      if (!b["methods"].is_array()) throw ConfigError("bench.methods: expected an array of strings");
      c.bench_methods.emplace();
      for (const json& m : b["methods"]) {
        if (!m.is_string()) throw ConfigError("bench.methods: expected an array of strings");
        try {
          c.bench_methods->push_back(parse_method(m.get<std::string>()));
        } catch (const ConfigError& e) {
          throw ConfigError(std::string("bench.methods: ") + e.what());
        }
      }
    }
  }
  return c;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j, std::move(base));
}

json config_to_json(const RunConfig& c) {
  json bench = json::object();
  if (c.bench_betas) bench["betas"] = *c.bench_betas;
  if (c.bench_etas) bench["etas"] = *c.bench_etas;
  if (c.bench_methods) {
    json methods = json::array();
    for (Method m : *c.bench_methods) methods.push_back(method_name(m));
    bench["methods"] = methods;
  }
  return {
      {"geometry",
       {{"lattice", c.lattice}, {"twist_degrees", c.twist_degrees}, {"interlayer_gap", c.interlayer_gap}}},
      {"model", {{"r_cut", c.r_cut}}},
      {"params",
       {{"beta", c.params.beta}, {"eta", c.params.eta}, {"omega", c.params.omega}, {"e_fermi", c.params.e_fermi}}},
      {"run",
       {{"r", c.r},
        {"q", c.q},
        {"method", method_name(c.method)},
        {"eps", c.eps},
        {"kmax", c.kmax},
        {"k_poles", c.k_poles < 0 ? json("auto") : json(c.k_poles)},
        {"group_size", c.group_size},
        {"threads", c.threads},
        {"resolvent_tol", c.resolvent_tol},
        {"lowmem", c.lowmem},
        {"b", {c.b[0], c.b[1]}},
        {"focal_layer", c.focal_layer}}},
      {"bench", bench}};
}

}  // namespace kubo
