#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace chpt {

inline constexpr const char* kToolVersion = "0.1.0";

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file, then renames into place, so a failed run
// never leaves a partial output behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// "key = value" lines, '#' starts a comment, blank lines ignored.
std::map<std::string, std::string> read_kv_file(const std::filesystem::path& path);
std::map<std::string, std::string> parse_kv(std::string_view text);

}  // namespace chpt
