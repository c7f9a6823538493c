#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nhmps/ed.hpp"
#include "nhmps/models.hpp"
#include "nhmps/vmps.hpp"

namespace nhmps::cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat section.key -> raw value map, preserved verbatim for the run record.
using ConfigEcho = std::map<std::string, std::string>;

struct RunConfig {
  std::string command;
  ModelSpec model;
  SweepConfig solver;

  std::string output_dir = ".";
  std::size_t threads = 1;
  bool verbose = false;

  Which which = Which::SR;
  std::optional<cplx> epsilon;  // solve only: fixed shift (hvmps path)

  // sweep grid
  double t_min = 0.0, t_max = 0.0;
  std::size_t t_steps = 0;
  double gamma_min = 0.0, gamma_max = 0.0;
  std::size_t gamma_steps = 0;
  std::size_t filling = 0;  // 0 = auto (half filling)

  std::vector<std::size_t> p_list;   // distributions
  std::vector<std::size_t> d_list;   // entropy / benchmark-ed bond dimensions
  std::vector<double> u_list;        // benchmark-ed
  std::vector<std::size_t> n_list;   // overlap-scaling cell counts
};

// Parses an INI-style file: `[section]` headers, `key = value` lines, and
// `#` comments. Unknown sections or keys are errors, as are sections that do
// not belong to the configured command.
std::pair<RunConfig, ConfigEcho> parse_config_file(const std::string& path);
std::pair<RunConfig, ConfigEcho> parse_config_text(const std::string& text);

struct CliOverrides {
  std::optional<std::string> output_dir;
  std::optional<std::size_t> threads;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

void apply_overrides(RunConfig& cfg, ConfigEcho& echo, const CliOverrides& ov);

}  // namespace nhmps::cli
