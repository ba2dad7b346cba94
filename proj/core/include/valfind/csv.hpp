#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace valfind::csv {

using Row = std::vector<std::string>;

/// Parse RFC-4180 CSV (quoted fields, doubled quotes, embedded newlines).
/// Records are returned with the physical line on which each one started.
struct Record {
  Row fields;
  std::size_t line = 0;
};
std::vector<Record> parse(std::istream& in);

/// Quote a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);
void write_row(std::ostream& out, const Row& row);

}  // namespace valfind::csv
