#pragma once

#include "qbk/market.hpp"

#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace qbk::sql {

/// One query in the restricted dialect:
///   SELECT cols FROM <exchange> WHERE name IN (...) AND trade_date BETWEEN a AND b
struct QuerySpec {
    Exchange exchange = Exchange::shenzhen;
    std::set<std::string> tickers; // matched on `name`, exact, case-sensitive
    Date date_from;
    Date date_to;
    std::vector<std::string> columns; // ordered, non-empty, schema columns

    bool operator==(const QuerySpec&) const = default;
};

struct SqlParseError : std::runtime_error {
    SqlParseError(std::string message, std::size_t position)
        : std::runtime_error(std::move(message)), pos(position) {}
    std::size_t pos;
};

struct SqlExecError : std::runtime_error {
    enum class Kind { unknown_table, unknown_column };
    SqlExecError(Kind k, const std::string& what_arg)
        : std::runtime_error(what_arg), kind(k) {}
    Kind kind;
};

/// A cell is text (name, stock_code), a date, or a numeric.
using Cell = std::variant<std::string, Date, double>;

/// Projected rows from execute(). Comparison between result sets aligns
/// columns by name and ignores row order (order-insensitive multiset).
struct ResultSet {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    bool empty() const { return rows.empty(); } // EmptyResult is a flag, not an error

    /// Multiset equality under column-name alignment. Differing column
    /// sets compare unequal; duplicate rows must match in multiplicity.
    bool equivalent(const ResultSet& other) const;
};

/// Canonical rendering; tickers emitted sorted lexicographically, dates as
/// ISO-8601. parse(render(spec)) == spec for every valid spec.
std::string render(const QuerySpec& spec);

/// Parses the restricted dialect. Keywords are case-insensitive and
/// whitespace is free-form; anything outside the grammar throws
/// SqlParseError. Column and table names are validated at execution.
QuerySpec parse(const std::string& sql_text);

/// Runs a parsed query against the store. Throws SqlExecError for an
/// unloaded table or a column outside the schema.
ResultSet execute(const QuerySpec& spec, const MarketStore& store);

/// Parse + execute in one step.
ResultSet execute(const std::string& sql_text, const MarketStore& store);

} // namespace qbk::sql
