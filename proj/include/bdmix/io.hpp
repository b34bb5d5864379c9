#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bdmix {

// 17 significant digits, round-trippable
std::string fmt17(double x);

inline const char* fmt_bool(bool b) { return b ? "true" : "false"; }

// minimal table: header + string cells, rendered as CSV
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
    void write_csv(std::ostream& os) const;
};

}  // namespace bdmix
