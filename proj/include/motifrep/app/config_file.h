/**
 * @file config_file.h
 * @brief Flat key-value configuration files: TOML-style (sections become nested objects)
 *        or JSON, selected by the .json extension.
 */

#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace motifrep {

/// Scalars are typed as integer, float, boolean or string; multi-valued keys become arrays.
/// Throws SchemaError naming the file on a syntax error.
nlohmann::json read_config_file(const std::filesystem::path& path);
nlohmann::json parse_toml_config(const std::string& text, const std::string& source = "config");

/// j[section] if it is an object, otherwise j itself (so flat files work for every section).
const nlohmann::json& config_section(const nlohmann::json& j, const std::string& section);

}  // namespace motifrep
