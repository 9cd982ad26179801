// report.hpp
//
// CSV and JSON emission with atomic file replacement.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace schrolab {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    bool operator==(const CsvTable&) const = default;
};

// 12 significant digits; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double v);

// Header line plus one line per row, each newline-terminated.  Throws
// std::invalid_argument when a row length differs from the header.
std::string to_csv(const CsvTable& t);
CsvTable parse_csv(const std::string& text);

// Writes to a sibling temporary file, then renames over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace schrolab
