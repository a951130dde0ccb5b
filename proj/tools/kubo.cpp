#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "kubo/run.hpp"

namespace {

struct Flags {
  std::string config, method, k, out, format;
  std::optional<double> beta, eta, omega, efermi, eps;
  std::optional<int> r, q, kmax, group, threads;
};

void add_flags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--method", f.method, "kpm|poles|exact");
  app->add_option("--beta", f.beta, "inverse temperature");
  app->add_option("--eta", f.eta, "relaxation rate");
  app->add_option("--omega", f.omega, "frequency");
  app->add_option("--efermi", f.efermi, "Fermi energy");
  app->add_option("--r", f.r, "cut-out radius (0: recommended)");
  app->add_option("--q", f.q, "quadrature points per direction");
  app->add_option("--eps", f.eps, "series truncation tolerance");
  app->add_option("--kmax", f.kmax, "coefficient table size");
  app->add_option("--k", f.k, "number of poles, or auto");
  app->add_option("--group", f.group, "pole group size");
  app->add_option("--threads", f.threads, "worker threads");
  app->add_option("--out", f.out, "output file (default stdout)");
  app->add_option("--format", f.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
}

kubo::RunConfig resolve(const Flags& f) {
  kubo::RunConfig c;
  if (!f.config.empty()) c = kubo::load_config(f.config);
  if (!f.method.empty()) c.method = kubo::parse_method(f.method);
  if (f.beta) c.params.beta = *f.beta;
  if (f.eta) c.params.eta = *f.eta;
  if (f.omega) c.params.omega = *f.omega;
  if (f.efermi) c.params.e_fermi = *f.efermi;
  if (f.eps) c.eps = *f.eps;
  if (f.r) c.r = *f.r;
  if (f.q) c.q = *f.q;
  if (f.kmax) c.kmax = *f.kmax;
  if (f.group) c.group_size = *f.group;
  if (f.threads) c.threads = *f.threads;
  if (!f.k.empty()) {
    if (f.k == "auto") {
      c.k_poles = -1;
    } else {
      try {
        std::size_t used = 0;
        c.k_poles = std::stoi(f.k, &used);
        if (used != f.k.size()) throw std::invalid_argument(f.k);
      } catch (const std::exception&) {
        throw kubo::ConfigError("--k: expected an integer or auto");
      }
    }
  }
  c.validate();
  c.params.validate();
  return c;
}

void emit(const Flags& f, const std::string& text) {
  if (f.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(f.out);
  if (!os) throw kubo::ConfigError("--out: cannot open '" + f.out + "'");
  os << text;
}

void print_warnings(const nlohmann::json& doc) {
  if (doc.contains("warnings"))
    for (const auto& w : doc["warnings"]) std::cerr << "warning: " << w.get<std::string>() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local and integrated Kubo conductivity of incommensurate bilayers"};
  app.require_subcommand(1);
  Flags f;
  auto* rates = app.add_subcommand("rates", "decay rates and regime of F");
  auto* coeffs = app.add_subcommand("coeffs", "Chebyshev coefficients of F");
  auto* local = app.add_subcommand("sigma-local", "local conductivity at one configuration");
  auto* integ = app.add_subcommand("sigma-integrate", "conductivity by configuration quadrature");
  auto* bench = app.add_subcommand("bench", "operation counts and timings over a sweep");
  for (auto* s : {rates, coeffs, local, integ, bench}) add_flags(s, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const kubo::RunConfig c = resolve(f);
    if (rates->parsed()) {
      const auto doc = kubo::run_rates(c);
      emit(f, doc.dump(2) + "\n");
    } else if (coeffs->parsed()) {
      const auto out = kubo::run_coeffs(c);
      if (f.format == "json") {
        emit(f, out.summary.dump(2) + "\n");
      } else {
        emit(f, out.csv);
        if (!f.out.empty()) std::ofstream(f.out + ".summary.json") << out.summary.dump(2) << '\n';
        else std::cerr << out.summary.dump() << '\n';
      }
    } else if (local->parsed()) {
      const auto doc = kubo::run_sigma_local(c);
      print_warnings(doc);
      emit(f, doc.dump(2) + "\n");
    } else if (integ->parsed()) {
      const auto out = kubo::run_sigma_integrate(c);
      print_warnings(out.doc);
      emit(f, f.format == "csv" ? out.csv : out.doc.dump(2) + "\n");
    } else if (bench->parsed()) {
      const std::string csv = kubo::run_bench(c);
      if (f.format == "json") {
        // one object per CSV row
        nlohmann::json rows = nlohmann::json::array();
        std::istringstream in(csv);
        std::string line, header;
        std::getline(in, header);
        std::vector<std::string> keys;
        for (std::istringstream h(header); std::getline(h, line, ',');) keys.push_back(line);
        while (std::getline(in, line)) {
          nlohmann::json row;
          std::istringstream cells(line);
          std::string cell;
          for (std::size_t i = 0; i < keys.size() && std::getline(cells, cell, ','); ++i)
            row[keys[i]] = i == 0 ? nlohmann::json(cell) : nlohmann::json::parse(cell);  // keeps counts integral
          rows.push_back(row);
        }
        emit(f, rows.dump(2) + "\n");
      } else {
        emit(f, csv);
      }
    }
  } catch (const kubo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const kubo::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::bad_alloc&) {
    std::cerr << "numerical failure: out of memory\n";
    return 3;
  }
  return 0;
}
