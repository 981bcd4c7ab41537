#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gsc::csv {

/// A parsed CSV file: first line is the header, remaining lines are rows.
struct Table {
    std::string source;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Table read(const std::filesystem::path& path);
Table parse(std::string_view text, std::string source = "<memory>");

/// Parses a numeric cell; throws ValidationError naming source, row and column on failure.
double to_double(const std::string& cell, const std::string& source, std::size_t row, std::size_t col);

/// Shortest representation that round-trips a double.
std::string format_exact(double value);
std::string format_fixed(double value, int digits);

/// Quotes a field only when it contains a separator, quote, or newline.
std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

/// Writes via a sibling temporary file and renames it into place, so a failed
/// write never leaves a partial file behind.
void write_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer);

}  // namespace gsc::csv
