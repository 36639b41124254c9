#ifndef ENGAGE_CSV_HPP
#define ENGAGE_CSV_HPP

#include <string>
#include <vector>

namespace engage::csv {

// Minimal RFC-4180 style CSV: comma separated, one header row, double quotes
// for fields containing commas/quotes/newlines, "" as an escaped quote.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column index for a header name, or -1.
    int column_index(const std::string& name) const;
};

Table read_file(const std::string& path);

std::string escape_field(const std::string& field);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

void write_file(const std::string& path, const Table& table);

}  // namespace engage::csv

#endif
