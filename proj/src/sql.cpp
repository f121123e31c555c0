#include "qbk/sql.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace qbk::sql {

namespace {

std::string quote_ticker(const std::string& name) {
    std::string out = "'";
    for (char c : name) {
        if (c == '\'') out += "''";
        else out += c;
    }
    out += "'";
    return out;
}

// Tokenizer for the restricted dialect: words, quoted strings, punctuation.
struct Token {
    enum class Kind { word, string, comma, lparen, rparen, end };
    Kind kind;
    std::string text; // word spelling (original case) or string contents
    std::size_t pos;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    Token next() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ >= text_.size()) return {Token::Kind::end, "", pos_};
        const std::size_t start = pos_;
        const char c = text_[pos_];
        if (c == ',') { ++pos_; return {Token::Kind::comma, ",", start}; }
        if (c == '(') { ++pos_; return {Token::Kind::lparen, "(", start}; }
        if (c == ')') { ++pos_; return {Token::Kind::rparen, ")", start}; }
        if (c == '\'') {
            ++pos_;
            std::string value;
            while (true) {
                if (pos_ >= text_.size()) throw SqlParseError("unterminated string literal", start);
                if (text_[pos_] == '\'') {
                    if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '\'') {
                        value += '\'';
                        pos_ += 2;
                    } else {
                        ++pos_;
                        break;
                    }
                } else {
                    value += text_[pos_++];
                }
            }
            return {Token::Kind::string, value, start};
        }
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
            std::string word;
            while (pos_ < text_.size()) {
                const char w = text_[pos_];
                if (std::isalnum(static_cast<unsigned char>(w)) || w == '_' || w == '-') {
                    word += w;
                    ++pos_;
                } else {
                    break;
                }
            }
            return {Token::Kind::word, word, start};
        }
        throw SqlParseError(std::string("unexpected character '") + c + "'", start);
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;
};

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

class Parser {
public:
    explicit Parser(const std::string& text) : lexer_(text) { advance(); }

    QuerySpec parse_query() {
        expect_keyword("SELECT");
        QuerySpec spec;
        spec.columns.push_back(expect_word("column name"));
        while (current_.kind == Token::Kind::comma) {
            advance();
            spec.columns.push_back(expect_word("column name"));
        }
        expect_keyword("FROM");
        const std::string table = expect_word("table name");
        auto ex = exchange_from_table_name(table);
        if (!ex)
            throw SqlExecError(SqlExecError::Kind::unknown_table, "unknown table: " + table);
        spec.exchange = *ex;

        expect_keyword("WHERE");
        expect_keyword("NAME");
        expect_keyword("IN");
        expect(Token::Kind::lparen, "(");
        spec.tickers.insert(expect_string("ticker name"));
        while (current_.kind == Token::Kind::comma) {
            advance();
            spec.tickers.insert(expect_string("ticker name"));
        }
        expect(Token::Kind::rparen, ")");

        expect_keyword("AND");
        expect_keyword("TRADE_DATE");
        expect_keyword("BETWEEN");
        spec.date_from = expect_date();
        expect_keyword("AND");
        spec.date_to = expect_date();
        if (current_.kind != Token::Kind::end)
            throw SqlParseError("trailing input after query", current_.pos);
        if (spec.date_to < spec.date_from)
            throw SqlParseError("date_from after date_to", 0);
        return spec;
    }

private:
    void advance() { current_ = lexer_.next(); }

    void expect(Token::Kind kind, const std::string& what) {
        if (current_.kind != kind)
            throw SqlParseError("expected " + what, current_.pos);
        advance();
    }

    void expect_keyword(const std::string& keyword) {
        if (current_.kind != Token::Kind::word || upper(current_.text) != keyword)
            throw SqlParseError("expected keyword " + keyword, current_.pos);
        advance();
    }

    std::string expect_word(const std::string& what) {
        if (current_.kind != Token::Kind::word)
            throw SqlParseError("expected " + what, current_.pos);
        std::string text = current_.text;
        advance();
        return text;
    }

    std::string expect_string(const std::string& what) {
        if (current_.kind != Token::Kind::string)
            throw SqlParseError("expected quoted " + what, current_.pos);
        std::string text = current_.text;
        advance();
        return text;
    }

    Date expect_date() {
        const std::size_t pos = current_.pos;
        const std::string text = expect_string("date");
        auto d = Date::parse(text);
        if (!d) throw SqlParseError("bad date literal '" + text + "'", pos);
        return *d;
    }

    Lexer lexer_;
    Token current_{Token::Kind::end, "", 0};
};

Cell column_value(const Bar& bar, const std::string& column) {
    if (column == "name") return bar.name;
    if (column == "stock_code") return bar.stock_code;
    if (column == "trade_date") return bar.trade_date;
    if (column == "opening_price") return bar.opening_price;
    if (column == "closing_price") return bar.closing_price;
    if (column == "highest_price") return bar.highest_price;
    if (column == "lowest_price") return bar.lowest_price;
    if (column == "volume_traded") return bar.volume_traded;
    if (column == "amount_traded") return bar.amount_traded;
    if (column == "percentage_change") return bar.percentage_change;
    throw SqlExecError(SqlExecError::Kind::unknown_column, "unknown column: " + column);
}

} // namespace

std::string render(const QuerySpec& spec) {
    std::ostringstream out;
    out << "SELECT ";
    for (std::size_t i = 0; i < spec.columns.size(); ++i) {
        if (i) out << ", ";
        out << spec.columns[i];
    }
    out << " FROM " << exchange_table_name(spec.exchange) << " WHERE name IN (";
    std::size_t i = 0;
    for (const auto& ticker : spec.tickers) { // std::set iterates sorted
        if (i++) out << ", ";
        out << quote_ticker(ticker);
    }
    out << ") AND trade_date BETWEEN '" << spec.date_from.to_string() << "' AND '"
        << spec.date_to.to_string() << "'";
    return out.str();
}

QuerySpec parse(const std::string& sql_text) {
    return Parser(sql_text).parse_query();
}

ResultSet execute(const QuerySpec& spec, const MarketStore& store) {
    if (!store.has(spec.exchange))
        throw SqlExecError(SqlExecError::Kind::unknown_table,
                           "table not loaded: " + exchange_table_name(spec.exchange));
    for (const auto& col : spec.columns) {
        if (!is_schema_column(col))
            throw SqlExecError(SqlExecError::Kind::unknown_column, "unknown column: " + col);
    }
    const OhlcvTable& table = store.table(spec.exchange);
    ResultSet result;
    result.columns = spec.columns;
    for (const auto& ticker : spec.tickers) {
        if (!table.has_ticker(ticker)) continue; // unmatched ticker selects nothing
        for (const Bar& bar : table.slice(ticker, spec.date_from, spec.date_to)) {
            std::vector<Cell> row;
            row.reserve(spec.columns.size());
            for (const auto& col : spec.columns) row.push_back(column_value(bar, col));
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

ResultSet execute(const std::string& sql_text, const MarketStore& store) {
    return execute(parse(sql_text), store);
}

bool ResultSet::equivalent(const ResultSet& other) const {
    // Align columns by name; the projected column sets must agree.
    std::vector<std::string> a_cols = columns;
    std::vector<std::string> b_cols = other.columns;
    std::sort(a_cols.begin(), a_cols.end());
    std::sort(b_cols.begin(), b_cols.end());
    if (a_cols != b_cols) return false;

    auto order_of = [](const std::vector<std::string>& cols, const std::vector<std::string>& sorted) {
        std::vector<std::size_t> order;
        order.reserve(sorted.size());
        for (const auto& name : sorted) {
            auto it = std::find(cols.begin(), cols.end(), name);
            order.push_back(static_cast<std::size_t>(it - cols.begin()));
        }
        return order;
    };

    auto normalise = [](const std::vector<std::vector<Cell>>& rows,
                        const std::vector<std::size_t>& order) {
        std::vector<std::string> keys;
        keys.reserve(rows.size());
        for (const auto& row : rows) {
            std::ostringstream key;
            for (std::size_t idx : order) {
                const Cell& cell = row[idx];
                if (std::holds_alternative<std::string>(cell)) {
                    key << "s:" << std::get<std::string>(cell);
                } else if (std::holds_alternative<Date>(cell)) {
                    key << "d:" << std::get<Date>(cell).to_string();
                } else {
                    char buf[40];
                    std::snprintf(buf, sizeof(buf), "n:%.17g", std::get<double>(cell));
                    key << buf;
                }
                key << '\x1f';
            }
            keys.push_back(key.str());
        }
        std::sort(keys.begin(), keys.end());
        return keys;
    };

    return normalise(rows, order_of(columns, a_cols)) ==
           normalise(other.rows, order_of(other.columns, b_cols));
}

} // namespace qbk::sql
