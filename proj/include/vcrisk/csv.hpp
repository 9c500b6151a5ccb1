#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace vcrisk::csv {

/// Splits one CSV record. Handles double-quoted fields with "" escapes;
/// surrounding whitespace on unquoted fields is trimmed.
std::vector<std::string> split_line(std::string_view line);

/// Reads a whole text file. Throws Error(IoError).
std::string read_file(const std::filesystem::path& path);

/// Writes text atomically enough for our purposes (truncate + write).
void write_file(const std::filesystem::path& path, std::string_view text);

/// Splits text into lines, dropping '\r' and trailing empty lines.
std::vector<std::string> lines(std::string_view text);

}  // namespace vcrisk::csv
