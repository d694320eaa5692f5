#pragma once

#include <string>

namespace evoctl {

/// Entry point of the `evoctl` command line; returns the process exit code.
///   0  all requested checks passed
///   1  a defect threshold or the well-posedness check failed
///   2  invalid configuration or grid
///   3  numerical failure (singular step, rank error, ...)
int run_cli(int argc, const char* const* argv);

/// Default configuration as a JSON string.
std::string default_config_json();

}  // namespace evoctl
