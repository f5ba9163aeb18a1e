#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace insar {

/// Writes to `<path>.tmp` and renames over `path`, so readers never observe
/// a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace insar
