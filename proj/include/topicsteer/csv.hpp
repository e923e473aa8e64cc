#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace topicsteer::csv {

using Row = std::vector<std::string>;

/// RFC 4180 quoting: fields containing a comma, quote, CR or LF are quoted.
std::string escape(std::string_view field);
std::string format_row(const Row& row);

/// Parses RFC 4180 text (quoted fields may span lines). Blank lines are skipped.
std::vector<Row> parse(std::string_view text);
std::vector<Row> read_file(const std::filesystem::path& path);

/// Fixed six-decimal formatting used for every score column.
std::string format_number(double value);

}  // namespace topicsteer::csv
