#include "rwlt/report.hpp"

#include "rwlt/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <ostream>

namespace rwlt {

void Table::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size())
        throw Error(ErrorKind::InvalidArgument, "row width does not match table " + name);
    rows.push_back(std::move(row));
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string format_cell(const Cell& cell) {
    struct Visitor {
        std::string operator()(std::monostate) const { return {}; }
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(std::uint64_t v) const { return std::to_string(v); }
        std::string operator()(double v) const { return format_double(v); }
        std::string operator()(bool v) const { return v ? "true" : "false"; }
    };
    return std::visit(Visitor{}, cell);
}

void write_csv(const Report& report, std::ostream& os) {
    for (const auto& [k, v] : report.metadata) os << "# " << k << ": " << v << '\n';
    bool first = true;
    for (const auto& t : report.tables) {
        if (!first) os << '\n';
        first = false;
        os << "# table: " << t.name << '\n';
        for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
        os << '\n';
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_cell(row[i]);
            os << '\n';
        }
    }
    for (const auto& [k, v] : report.summary) os << "# summary: " << k << "=" << format_cell(v) << '\n';
}

namespace {

nlohmann::ordered_json to_json(const Cell& cell) {
    struct Visitor {
        nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
        nlohmann::ordered_json operator()(const std::string& s) const { return s; }
        nlohmann::ordered_json operator()(std::int64_t v) const { return v; }
        nlohmann::ordered_json operator()(std::uint64_t v) const { return v; }
        nlohmann::ordered_json operator()(double v) const {
            if (!std::isfinite(v)) return format_double(v);
            return v;
        }
        nlohmann::ordered_json operator()(bool v) const { return v; }
    };
    return std::visit(Visitor{}, cell);
}

}  // namespace

void write_json(const Report& report, std::ostream& os) {
    nlohmann::ordered_json doc;
    doc["metadata"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : report.metadata) doc["metadata"][k] = v;
    doc["tables"] = nlohmann::ordered_json::object();
    for (const auto& t : report.tables) {
        auto rows = nlohmann::ordered_json::array();
        for (const auto& row : t.rows) {
            nlohmann::ordered_json obj;
            for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = to_json(row[i]);
            rows.push_back(std::move(obj));
        }
        doc["tables"][t.name] = std::move(rows);
    }
    doc["summary"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : report.summary) doc["summary"][k] = to_json(v);
    os << doc.dump(2) << '\n';
}

}  // namespace rwlt
