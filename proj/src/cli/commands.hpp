#pragma once

#include "config.hpp"

namespace nhmps::cli {

// Runs the configured command, writing its data files and run_record.json
// into cfg.output_dir. Returns the process exit code: 0 on success, 2 when a
// required solver run failed to converge. Numerical failures propagate as
// exceptions (mapped to exit code 4 by main).
int run_command(const RunConfig& cfg, const ConfigEcho& echo);

}  // namespace nhmps::cli
