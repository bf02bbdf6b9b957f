#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nushu::io {

std::string read_file(const std::filesystem::path& path);

/// Splits file content into lines. A trailing newline does not produce an
/// empty final line; CRLF endings are accepted.
std::vector<std::string> split_lines(std::string_view content);

std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames over the target, so readers
/// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::vector<std::string_view> split(std::string_view line, char sep);

/// TSV field escaping: backslash, TAB, LF and CR become \\ \t \n \r.
std::string escape_field(std::string_view field);
std::string unescape_field(std::string_view field);

}  // namespace nushu::io
