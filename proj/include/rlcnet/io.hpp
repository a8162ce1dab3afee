#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace rlcnet {

std::string read_text_file(const std::filesystem::path& path);

/// Writes atomically enough for our purposes: parent directories are created
/// and the file is truncated first.
void write_text_file(const std::filesystem::path& path, const std::string& text);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

/// Shortest decimal that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace rlcnet
