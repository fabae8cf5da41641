#pragma once

#include <stdexcept>
#include <string>

namespace coinccl {

// Exit codes shared by the CLI and the command entry points.
enum exit_code : int {
  exit_ok = 0,
  exit_warnings = 1, // warnings promoted to failure under --strict
  exit_config = 2,   // configuration or file IO problem
  exit_numeric = 3,  // quadrature non-convergence, singular solve, ...
};

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// malformed input file; carries path and 1-based line number when known
struct parse_error : config_error {
  parse_error(const std::string& what, std::string path, long line)
      : config_error(path + ":" + std::to_string(line) + ": " + what),
        path(std::move(path)), line(line) {}
  std::string path;
  long line;
};

// structurally valid input violating a documented invariant
struct validation_error : config_error {
  using config_error::config_error;
};

// evaluation outside a table's tabulated domain
struct domain_error : std::runtime_error {
  domain_error(const std::string& what, double value)
      : std::runtime_error(what), value(value) {}
  double value;
};

struct numerical_error : std::runtime_error {
  numerical_error(const std::string& what, double energy_eV = 0, double q_per_nm = 0)
      : std::runtime_error(what), energy_eV(energy_eV), q_per_nm(q_per_nm) {}
  double energy_eV;
  double q_per_nm;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace coinccl
