#pragma once

#include <string>

#include "dmfp/config.hpp"

namespace dmfp {

/// Dispatches one subcommand (sample | solve | dmfp | validate | stability)
/// against a parsed config, writing artifacts plus a manifest under the
/// config's output directory. Returns the process exit status:
/// 0 success, 1 validation error, 2 runtime error. Messages go to stderr.
int run_subcommand(const std::string& name, const RunConfig& config);

}  // namespace dmfp
