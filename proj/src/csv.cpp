#include "sectorrank/csv.hpp"

#include "sectorrank/error.hpp"

namespace sectorrank::csv {

std::vector<Row> parse(std::string_view text) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool row_has_content = false;
  std::size_t line = 1;
  row.line = 1;

  auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_row = [&] {
    if (row_has_content || !row.fields.empty()) {
      end_field();
      rows.push_back(std::move(row));
    }
    row = Row{};
    row_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
    case '"':
      if (field.empty() && !field_was_quoted) {
        in_quotes = true;
        field_was_quoted = true;
        row_has_content = true;
      } else {
        throw Error(ErrorKind::MalformedRow,
                    "line " + std::to_string(line) + ": stray quote inside unquoted field");
      }
      break;
    case ',':
      end_field();
      row_has_content = true;
      break;
    case '\r':
      if (i + 1 < text.size() && text[i + 1] == '\n') break;
      [[fallthrough]];
    case '\n':
      end_row();
      ++line;
      row.line = line;
      break;
    default:
      if (field_was_quoted) {
        throw Error(ErrorKind::MalformedRow,
                    "line " + std::to_string(line) + ": text after closing quote");
      }
      field.push_back(c);
      row_has_content = true;
    }
  }
  if (in_quotes) {
    throw Error(ErrorKind::MalformedRow, "unterminated quoted field at end of input");
  }
  end_row();
  return rows;
}

std::vector<Row> parse_with_header(std::string_view text, const std::vector<std::string> &header,
                                   const std::string &source) {
  auto rows = parse(text);
  if (rows.empty() || rows.front().fields != header) {
    throw Error(ErrorKind::BadHeader, source + ": expected header '" + join(header) + "'");
  }
  rows.erase(rows.begin());
  return rows;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join(const std::vector<std::string> &fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  return out;
}

} // namespace sectorrank::csv
