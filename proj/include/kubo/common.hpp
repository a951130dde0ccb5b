#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace kubo {

using cplx = std::complex<double>;
using Vector = std::vector<cplx>;

// Invalid user input: bad parameters, malformed configuration.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An algorithm could not reach its accuracy target or hit a guard.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace kubo
