#pragma once

// Minimal numeric CSV I/O: comma separated, '.' decimal, mandatory header, LF endings.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hyst {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    /// Index of a named column; throws ParseError when absent.
    std::size_t column(std::string_view name) const;
    std::vector<double> column_values(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text, const std::string& source = "<csv>");
CsvTable read_csv(const std::string& path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Writes header + rows with format_double and LF line endings.
void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace hyst
