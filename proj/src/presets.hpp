#pragma once

#include <string>
#include <vector>

namespace codedq {

std::vector<std::string> preset_names();

// Full config JSON for a named preset; empty string when unknown.
std::string preset_json(const std::string& name);

}  // namespace codedq
