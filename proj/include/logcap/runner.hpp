#pragma once

#include <filesystem>
#include <string>

#include "logcap/json_io.hpp"

namespace logcap {

struct RunResult {
  int exit_code = 0;  // 0 ok, 1 numerical failure, 2 input error
  std::string message;
};

// Batch entry point shared by the command line tool and the test suites.
// Dispatches on config["command"], writes the effective config (defaults
// resolved) to <outdir>/config.json and every output file atomically, so a
// persisted config reruns to byte-identical artifacts.
RunResult run_config(const json& config, const std::filesystem::path& outdir);

json capacity_config_defaults(json config);
json wiener_config_defaults(json config);
json solve_config_defaults(json config);
json simulate_config_defaults(json config);
json family_config_defaults(json config);

}  // namespace logcap
