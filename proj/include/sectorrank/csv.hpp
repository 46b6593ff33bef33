#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sectorrank::csv {

struct Row {
  std::size_t line = 0; // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// RFC-4180 reader: quoted fields, doubled quotes, CRLF or LF records,
/// newlines inside quotes. A trailing newline does not produce an empty row.
std::vector<Row> parse(std::string_view text);

/// Parses `text` and checks the first row equals `header` exactly.
/// Throws Error(BadHeader) otherwise. Returns the data rows only.
std::vector<Row> parse_with_header(std::string_view text, const std::vector<std::string> &header,
                                   const std::string &source);

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string> &fields);

} // namespace sectorrank::csv
