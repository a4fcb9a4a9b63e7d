#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "augpe/core.hpp"

namespace augpe::config {

/// Parses a RunConfig from its JSON form. Unknown keys are hard errors (a
/// typo in a privacy-critical parameter must not fall back to a default);
/// every problem found is listed in one ConfigError.
RunConfig from_json(const nlohmann::json& j);

RunConfig load_file(const std::filesystem::path& path);

/// Canonical JSON form; from_json(to_json(cfg)) reproduces the config.
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace augpe::config
