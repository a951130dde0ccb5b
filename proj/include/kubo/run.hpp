#pragma once

#include <string>

#include "kubo/config.hpp"

namespace kubo {

nlohmann::json run_rates(const RunConfig& c);

struct CoeffsOutput {
  std::string csv;  // k1,k2,re,im,normalized_abs
  nlohmann::json summary;
};
CoeffsOutput run_coeffs(const RunConfig& c);

nlohmann::json run_sigma_local(const RunConfig& c);

struct IntegrateOutput {
  nlohmann::json doc;
  std::string csv;  // per-node sigma
};
IntegrateOutput run_sigma_integrate(const RunConfig& c);

// method, beta, eta, n, matvecs, inner_products, solves, wall_ms, sigma_re, sigma_im
std::string run_bench(const RunConfig& c);
inline constexpr const char* kBenchHeader =
    "method,beta,eta,n,matvecs,inner_products,solves,wall_ms,sigma_re,sigma_im";

nlohmann::json counters_json(const OpCounters& c);

}  // namespace kubo
