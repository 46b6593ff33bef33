#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace sectorrank {

/// Reads a whole file. Throws Error(Io) if it cannot be opened.
std::string read_file(const std::filesystem::path &path);

/// Writes `contents` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path &path, std::string_view contents);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Unicode NFC normalization followed by ASCII/Unicode whitespace trim.
/// Throws Error(MalformedRow) on invalid UTF-8.
std::string normalize_name(std::string_view raw);

std::string_view trim(std::string_view s);

} // namespace sectorrank
