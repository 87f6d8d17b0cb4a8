#pragma once

#include <string>

#include "unityforest/forest.hpp"

namespace unityforest {

// Self-describing JSON model format; format_version is mandatory and checked
// on load. Numbers use shortest round-trip formatting, so save/load/save is
// byte-identical.
inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const Forest& forest);
Forest model_from_json(const std::string& json_text);

void save_model(const Forest& forest, const std::string& path);
Forest load_model(const std::string& path);

} // namespace unityforest
