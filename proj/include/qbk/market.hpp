#pragma once

#include "qbk/date.hpp"

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qbk {

enum class Exchange { beijing, shenzhen, shanghai };

/// Table name used in SQL, e.g. "shenzhen_stock_exchange".
std::string exchange_table_name(Exchange ex);
std::optional<Exchange> exchange_from_table_name(const std::string& name);

/// One trading day's record, column names per the exchange schema.
struct Bar {
    std::string name;
    std::string stock_code;
    Date trade_date;
    double opening_price = 0.0;
    double closing_price = 0.0;
    double highest_price = 0.0;
    double lowest_price = 0.0;
    double volume_traded = 0.0;
    double amount_traded = 0.0;
    double percentage_change = 0.0; // percent units: 1.5 means +1.5%
};

/// Ordered list of the ten schema column names.
std::span<const std::string> schema_columns();
bool is_schema_column(const std::string& name);

/// Per-exchange daily OHLCV table. Rows are grouped per ticker and each
/// ticker's series is strictly increasing in trade_date. Immutable after
/// ingest; safe to share read-only across threads.
class OhlcvTable {
public:
    explicit OhlcvTable(Exchange ex) : exchange_(ex) {}

    Exchange exchange() const { return exchange_; }

    /// Ticker names (matched on `name`), sorted.
    std::vector<std::string> tickers() const;
    bool has_ticker(const std::string& name) const;

    /// Full stored series for one ticker. Throws UnknownTicker.
    std::span<const Bar> series(const std::string& ticker) const;

    /// Contiguous sub-series with inclusive date bounds; empty if no
    /// overlap. Throws UnknownTicker.
    std::span<const Bar> slice(const std::string& ticker, const Date& date_from,
                               const Date& date_to) const;

    std::size_t row_count() const;

    bool operator==(const OhlcvTable& other) const {
        return exchange_ == other.exchange_ && rows_equal(other);
    }

private:
    friend struct TableBuilder;
    bool rows_equal(const OhlcvTable& other) const;

    Exchange exchange_;
    std::map<std::string, std::vector<Bar>> by_ticker_;
};

struct UnknownTicker : std::runtime_error {
    explicit UnknownTicker(const std::string& ticker)
        : std::runtime_error("unknown ticker: " + ticker) {}
};

/// File-level ingest failure (bad header). Row-level problems do not throw;
/// they are reported per row in IngestResult.
struct MissingColumn : std::runtime_error {
    explicit MissingColumn(const std::string& column)
        : std::runtime_error("missing column: " + column) {}
};

enum class RowRejectReason { unparsable_value, ohlc_order_violation, duplicate_date, wrong_field_count };

struct RowRejection {
    std::size_t line; // 1-based line number in the file
    RowRejectReason reason;
    std::string detail;
};

std::string to_string(RowRejectReason r);

struct IngestResult {
    OhlcvTable table;
    std::vector<RowRejection> rejected;
};

/// Reads one exchange's CSV. The header row must contain exactly the ten
/// schema columns (any order). Rows violating the OHLC ordering invariant,
/// rows with negative or non-finite numerics, and duplicate (ticker, date)
/// rows are rejected and reported; surviving rows are sorted by
/// (ticker, trade_date). Ingesting the same file twice yields equal tables.
IngestResult ingest_csv(const std::string& path, Exchange ex);

/// Same, reading from an open stream (used by tests and stdin ingest).
IngestResult ingest_csv_stream(std::istream& in, Exchange ex);

/// The set of exchange tables SQL executes against.
class MarketStore {
public:
    void add(OhlcvTable table);
    bool has(Exchange ex) const { return tables_.count(ex) != 0; }
    const OhlcvTable& table(Exchange ex) const;
    std::vector<Exchange> exchanges() const;

private:
    std::map<Exchange, OhlcvTable> tables_;
};

/// Splits one CSV record into fields. Handles RFC-4180 style quoting with
/// doubled-quote escapes; does not handle embedded newlines.
std::vector<std::string> split_csv_line(const std::string& line);

} // namespace qbk
