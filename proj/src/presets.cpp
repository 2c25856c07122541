#include "presets.hpp"

#include "presets_data.hpp"

namespace codedq {

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [name, text] : kPresets) names.emplace_back(name);
    return names;
}

std::string preset_json(const std::string& name) {
    for (const auto& [key, text] : kPresets)
        if (name == key) return text;
    return {};
}

}  // namespace codedq
