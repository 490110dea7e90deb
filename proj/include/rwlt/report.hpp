#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace rwlt {

/// One CSV/JSON value. An empty optional prints as an empty CSV field / JSON null.
using Cell = std::variant<std::monostate, std::string, std::int64_t, std::uint64_t, double, bool>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);
};

/// Output of one subcommand: `#` metadata lines, one CSV block per table, and
/// `#` summary lines. JSON mirrors the same names.
struct Report {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<Table> tables;
    std::vector<std::pair<std::string, Cell>> summary;
};

std::string format_cell(const Cell& cell);
std::string format_double(double x);

void write_csv(const Report& report, std::ostream& os);
void write_json(const Report& report, std::ostream& os);

}  // namespace rwlt
