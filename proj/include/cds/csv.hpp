#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cds::csv {

struct Row {
  std::size_t line = 0;  // 1-based physical line where the record starts
  std::vector<std::string> fields;
};

/// RFC 4180 reader: quoted fields, doubled quotes, embedded newlines, CRLF.
/// Blank lines are skipped. Throws Error(kInvalidArgument) on an
/// unterminated quote.
std::vector<Row> parse(std::string_view text);

/// Quotes a field when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

}  // namespace cds::csv
