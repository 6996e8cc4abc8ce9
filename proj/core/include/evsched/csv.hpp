#pragma once

#include <string>
#include <vector>

namespace evsched::csv {

// Minimal CSV support for the trace/profile/report files this project emits:
// comma separation, first row is the header, no quoting or embedded commas.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 if absent
    std::string to_string() const;
};

Table read_file(const std::string& path);
void write_file(const std::string& path, const Table& table);

std::string format_double(double v);  // shortest round-trip-safe form

}  // namespace evsched::csv
