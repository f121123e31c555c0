#include "qbk/market.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace qbk {

std::string exchange_table_name(Exchange ex) {
    switch (ex) {
    case Exchange::beijing: return "beijing_stock_exchange";
    case Exchange::shenzhen: return "shenzhen_stock_exchange";
    case Exchange::shanghai: return "shanghai_stock_exchange";
    }
    return {};
}

std::optional<Exchange> exchange_from_table_name(const std::string& name) {
    if (name == "beijing_stock_exchange") return Exchange::beijing;
    if (name == "shenzhen_stock_exchange") return Exchange::shenzhen;
    if (name == "shanghai_stock_exchange") return Exchange::shanghai;
    return std::nullopt;
}

namespace {

const std::array<std::string, 10> kSchemaColumns = {
    "name",          "stock_code",    "trade_date",   "opening_price",
    "closing_price", "highest_price", "lowest_price", "volume_traded",
    "amount_traded", "percentage_change",
};

} // namespace

std::span<const std::string> schema_columns() {
    return {kSchemaColumns.data(), kSchemaColumns.size()};
}

bool is_schema_column(const std::string& name) {
    return std::find(kSchemaColumns.begin(), kSchemaColumns.end(), name) != kSchemaColumns.end();
}

std::string to_string(RowRejectReason r) {
    switch (r) {
    case RowRejectReason::unparsable_value: return "UnparsableValue";
    case RowRejectReason::ohlc_order_violation: return "OhlcOrderViolation";
    case RowRejectReason::duplicate_date: return "DuplicateDate";
    case RowRejectReason::wrong_field_count: return "WrongFieldCount";
    }
    return "Unknown";
}

std::vector<std::string> OhlcvTable::tickers() const {
    std::vector<std::string> out;
    out.reserve(by_ticker_.size());
    for (const auto& [name, rows] : by_ticker_) out.push_back(name);
    return out;
}

bool OhlcvTable::has_ticker(const std::string& name) const {
    return by_ticker_.count(name) != 0;
}

std::span<const Bar> OhlcvTable::series(const std::string& ticker) const {
    auto it = by_ticker_.find(ticker);
    if (it == by_ticker_.end()) throw UnknownTicker(ticker);
    return it->second;
}

std::span<const Bar> OhlcvTable::slice(const std::string& ticker, const Date& date_from,
                                       const Date& date_to) const {
    auto full = series(ticker);
    auto lo = std::lower_bound(full.begin(), full.end(), date_from,
                               [](const Bar& b, const Date& d) { return b.trade_date < d; });
    auto hi = std::upper_bound(full.begin(), full.end(), date_to,
                               [](const Date& d, const Bar& b) { return d < b.trade_date; });
    if (lo >= hi) return {};
    return {&*lo, static_cast<std::size_t>(hi - lo)};
}

std::size_t OhlcvTable::row_count() const {
    std::size_t n = 0;
    for (const auto& [name, rows] : by_ticker_) n += rows.size();
    return n;
}

bool OhlcvTable::rows_equal(const OhlcvTable& other) const {
    if (by_ticker_.size() != other.by_ticker_.size()) return false;
    auto eq = [](const Bar& a, const Bar& b) {
        return a.name == b.name && a.stock_code == b.stock_code && a.trade_date == b.trade_date &&
               a.opening_price == b.opening_price && a.closing_price == b.closing_price &&
               a.highest_price == b.highest_price && a.lowest_price == b.lowest_price &&
               a.volume_traded == b.volume_traded && a.amount_traded == b.amount_traded &&
               a.percentage_change == b.percentage_change;
    };
    for (const auto& [name, rows] : by_ticker_) {
        auto it = other.by_ticker_.find(name);
        if (it == other.by_ticker_.end() || it->second.size() != rows.size()) return false;
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (!eq(rows[i], it->second[i])) return false;
    }
    return true;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

namespace {

// Strict numeric parse: full consumption, finite, no NaN/inf at the boundary.
std::optional<double> parse_number(const std::string& text) {
    if (text.empty()) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || errno == ERANGE) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

struct ParsedRow {
    Bar bar;
    std::optional<RowRejectReason> reject;
    std::string detail;
};

ParsedRow parse_row(const std::vector<std::string>& fields, const std::vector<int>& column_pos) {
    ParsedRow out;
    Bar& b = out.bar;
    b.name = fields[column_pos[0]];
    b.stock_code = fields[column_pos[1]];

    const std::string& date_text = fields[column_pos[2]];
    auto date = Date::parse(date_text);
    if (!date) {
        out.reject = RowRejectReason::unparsable_value;
        out.detail = "trade_date='" + date_text + "'";
        return out;
    }
    b.trade_date = *date;

    double* numeric_fields[7] = {&b.opening_price, &b.closing_price, &b.highest_price,
                                 &b.lowest_price,  &b.volume_traded, &b.amount_traded,
                                 &b.percentage_change};
    for (int i = 0; i < 7; ++i) {
        const std::string& text = fields[column_pos[3 + i]];
        auto v = parse_number(text);
        if (!v) {
            out.reject = RowRejectReason::unparsable_value;
            out.detail = kSchemaColumns[3 + i] + "='" + text + "'";
            return out;
        }
        *numeric_fields[i] = *v;
    }

    // percentage_change may be negative; prices and volumes may not.
    for (int i = 0; i < 6; ++i) {
        if (*numeric_fields[i] < 0.0) {
            out.reject = RowRejectReason::unparsable_value;
            out.detail = kSchemaColumns[3 + i] + " negative";
            return out;
        }
    }
    const double body_lo = std::min(b.opening_price, b.closing_price);
    const double body_hi = std::max(b.opening_price, b.closing_price);
    if (!(b.lowest_price <= body_lo && body_hi <= b.highest_price)) {
        out.reject = RowRejectReason::ohlc_order_violation;
        out.detail = b.name + " " + b.trade_date.to_string();
        return out;
    }
    return out;
}

} // namespace

struct TableBuilder {
    static void assign(OhlcvTable& table, std::map<std::string, std::vector<Bar>> rows) {
        table.by_ticker_ = std::move(rows);
    }
};

IngestResult ingest_csv_stream(std::istream& in, Exchange ex) {
    std::string header_line;
    if (!std::getline(in, header_line)) throw MissingColumn(kSchemaColumns[0]);
    auto header = split_csv_line(header_line);

    // Map schema column -> position in file; header order is free.
    std::vector<int> column_pos(kSchemaColumns.size(), -1);
    for (std::size_t c = 0; c < kSchemaColumns.size(); ++c) {
        for (std::size_t h = 0; h < header.size(); ++h) {
            if (header[h] == kSchemaColumns[c]) {
                column_pos[c] = static_cast<int>(h);
                break;
            }
        }
        if (column_pos[c] < 0) throw MissingColumn(kSchemaColumns[c]);
    }

    IngestResult result{OhlcvTable(ex), {}};
    std::map<std::string, std::vector<Bar>> rows;
    std::set<std::pair<std::string, Date>> seen;

    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            result.rejected.push_back({line_no, RowRejectReason::wrong_field_count,
                                       std::to_string(fields.size()) + " fields"});
            continue;
        }
        ParsedRow parsed = parse_row(fields, column_pos);
        if (parsed.reject) {
            result.rejected.push_back({line_no, *parsed.reject, parsed.detail});
            continue;
        }
        auto key = std::make_pair(parsed.bar.name, parsed.bar.trade_date);
        if (!seen.insert(key).second) {
            result.rejected.push_back({line_no, RowRejectReason::duplicate_date,
                                       parsed.bar.name + " " + parsed.bar.trade_date.to_string()});
            continue;
        }
        rows[parsed.bar.name].push_back(std::move(parsed.bar));
    }

    for (auto& [name, series] : rows) {
        std::sort(series.begin(), series.end(),
                  [](const Bar& a, const Bar& b) { return a.trade_date < b.trade_date; });
    }
    TableBuilder::assign(result.table, std::move(rows));
    return result;
}

IngestResult ingest_csv(const std::string& path, Exchange ex) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return ingest_csv_stream(in, ex);
}

void MarketStore::add(OhlcvTable table) {
    tables_.insert_or_assign(table.exchange(), std::move(table));
}

const OhlcvTable& MarketStore::table(Exchange ex) const {
    auto it = tables_.find(ex);
    if (it == tables_.end())
        throw std::runtime_error("no table loaded for " + exchange_table_name(ex));
    return it->second;
}

std::vector<Exchange> MarketStore::exchanges() const {
    std::vector<Exchange> out;
    for (const auto& [ex, table] : tables_) out.push_back(ex);
    return out;
}

} // namespace qbk
