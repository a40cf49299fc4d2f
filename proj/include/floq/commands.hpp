#pragma once

#include <string>

#include "floq/config.hpp"

namespace floq {

// Dispatches one CLI command, writing its CSV/JSON artifacts plus a
// <command>_summary.json into out_dir. Returns the process exit code:
// 0 success, 2 config error, 3 numerical failure.
int run_command(const std::string& name, const RunConfig& cfg, const std::string& out_dir,
                int threads);

}  // namespace floq
