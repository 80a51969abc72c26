#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace emoperf::csv {

/// A parsed CSV file. `rows[i]` corresponds to line `line_numbers[i]` (1-based, header is line 1).
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;

    /// Index of a header column, or nullopt.
    std::optional<std::size_t> column(std::string_view name) const;
};

/// Reads a comma separated file with a mandatory header row. Fields may be double-quoted.
/// Blank lines and lines starting with '#' are skipped. Throws InputError.
Table read(const std::filesystem::path& path);
Table parse(std::string_view text, const std::string& source_name);

/// Parses a finite real; throws InputError mentioning `context` otherwise.
double parse_real(std::string_view text, const std::string& context);
long long parse_int(std::string_view text, const std::string& context);

/// Shortest representation that round-trips to the identical double.
std::string format_real(double value);

/// Quotes a field when it contains a comma, quote or newline.
std::string escape(std::string_view field);
std::string join_row(const std::vector<std::string>& fields);

}  // namespace emoperf::csv
