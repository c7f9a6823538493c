#include <CLI11.hpp>
#include <iostream>

#include "../src/cli/commands.hpp"
#include "../src/cli/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"nhmps: right eigenstates of non-Hermitian lattice models via MPS"};

  std::string config_path;
  nhmps::cli::CliOverrides ov;
  std::string output_dir;
  std::size_t threads = 0;
  std::uint64_t seed = 0;

  app.add_option("-c,--config", config_path, "INI config file")->required();
  auto* o_out = app.add_option("-o,--output", output_dir, "output directory (overrides config)");
  auto* o_thr = app.add_option("-j,--threads", threads, "worker threads (overrides config)");
  auto* o_seed = app.add_option("-s,--seed", seed, "RNG seed (overrides config)");
  app.add_flag("-v,--verbose", ov.verbose, "print progress to stderr");

  CLI11_PARSE(app, argc, argv);

  if (*o_out) ov.output_dir = output_dir;
  if (*o_thr) ov.threads = threads;
  if (*o_seed) ov.seed = seed;

  try {
    auto [cfg, echo] = nhmps::cli::parse_config_file(config_path);
    nhmps::cli::apply_overrides(cfg, echo, ov);
    return nhmps::cli::run_command(cfg, echo);
  } catch (const nhmps::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
