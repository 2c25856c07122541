#pragma once

#include <string>

namespace codedq {

// Executes a config document (must carry a "command" key), writing artifacts
// under out_dir and returning a summary JSON string. overrides_json may be
// empty or an object with optional keys: seed, departures, replications.
// Throws ConfigError / InfeasibleError / UnstableError.
std::string run_config(const std::string& config_json, const std::string& overrides_json,
                       const std::string& out_dir);

}  // namespace codedq
