#include "qbk/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

namespace qbk::dsl {

namespace {

struct TerminalEntry {
    const char* name;
    Terminal value;
};

constexpr std::array<TerminalEntry, 14> kTerminals = {{
    {"OPEN", Terminal::open},
    {"HIGH", Terminal::high},
    {"LOW", Terminal::low},
    {"CLOSE", Terminal::close},
    {"VOLUME", Terminal::volume},
    {"AMOUNT", Terminal::amount},
    {"PERCENTAGE_CHANGE", Terminal::percentage_change},
    {"PV", Terminal::pv},
    {"CASH", Terminal::cash},
    {"POSITION", Terminal::position},
    {"PNL", Terminal::pnl},
    {"INITIAL_CAPITAL", Terminal::initial_capital},
    {"CASH_FINAL", Terminal::cash_final},
    {"POSITION_FINAL", Terminal::position_final},
}};

struct FuncEntry {
    const char* name;
    Func value;
    int min_arity;
    int max_arity;
    // Window argument handling for the second argument, if any.
    enum class Window { none, literal_ge0, literal_ge1, literal_ge1_or_marker } window;
};

constexpr std::array<FuncEntry, 20> kFuncs = {{
    {"DELAY", Func::delay, 2, 2, FuncEntry::Window::literal_ge0},
    {"SMA", Func::sma, 2, 2, FuncEntry::Window::literal_ge1_or_marker},
    {"EMA", Func::ema, 2, 2, FuncEntry::Window::literal_ge1},
    {"STD", Func::stddev, 1, 2, FuncEntry::Window::literal_ge1_or_marker},
    {"VAR", Func::variance, 2, 2, FuncEntry::Window::literal_ge1_or_marker},
    {"SKEW", Func::skew, 2, 2, FuncEntry::Window::literal_ge1_or_marker},
    {"MAX", Func::max, 1, 2, FuncEntry::Window::none},
    {"MIN", Func::min, 1, 2, FuncEntry::Window::none},
    {"ABS", Func::abs, 1, 1, FuncEntry::Window::none},
    {"SUM", Func::sum, 1, 2, FuncEntry::Window::literal_ge1_or_marker},
    {"IF", Func::if_then_else, 3, 3, FuncEntry::Window::none},
    {"SIGN", Func::sign, 1, 1, FuncEntry::Window::none},
    {"SQRT", Func::sqrt, 1, 1, FuncEntry::Window::none},
    {"POW", Func::pow, 2, 2, FuncEntry::Window::none},
    {"LINEARREG_SLOPE", Func::linearreg_slope, 2, 2, FuncEntry::Window::literal_ge1},
    {"CUMMAX", Func::cummax, 1, 1, FuncEntry::Window::none},
    {"MEAN", Func::mean, 1, 1, FuncEntry::Window::none},
    {"COUNT", Func::count, 1, 1, FuncEntry::Window::none},
    {"FIRST", Func::first, 1, 1, FuncEntry::Window::none},
    {"LAST", Func::last, 1, 1, FuncEntry::Window::none},
}};

const FuncEntry& func_entry(Func f) {
    for (const auto& e : kFuncs)
        if (e.value == f) return e;
    throw std::logic_error("unmapped function");
}

struct Token {
    enum class Kind { number, ident, op, lparen, rparen, comma, end };
    Kind kind;
    std::string text;
    double number = 0.0;
    std::size_t pos = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    Token next() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        const std::size_t start = pos_;
        if (pos_ >= src_.size()) return {Token::Kind::end, "", 0.0, start};
        const char c = src_[pos_];
        if (c == '(') { ++pos_; return {Token::Kind::lparen, "(", 0.0, start}; }
        if (c == ')') { ++pos_; return {Token::Kind::rparen, ")", 0.0, start}; }
        if (c == ',') { ++pos_; return {Token::Kind::comma, ",", 0.0, start}; }
        if (c == '*') {
            if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
                pos_ += 2;
                return {Token::Kind::op, "**", 0.0, start};
            }
            ++pos_;
            return {Token::Kind::op, "*", 0.0, start};
        }
        if (c == '+' || c == '-' || c == '/' || c == '>' || c == '<') {
            ++pos_;
            return {Token::Kind::op, std::string(1, c), 0.0, start};
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            return lex_number(start);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string ident;
            while (pos_ < src_.size()) {
                const char w = src_[pos_];
                if (std::isalnum(static_cast<unsigned char>(w)) || w == '_') {
                    ident += w;
                    ++pos_;
                } else {
                    break;
                }
            }
            return {Token::Kind::ident, ident, 0.0, start};
        }
        throw ExprError(ExprError::Kind::lex, std::string("unexpected character '") + c + "'",
                        start);
    }

private:
    Token lex_number(std::size_t start) {
        std::size_t end = pos_;
        while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
        if (end < src_.size() && src_[end] == '.') {
            ++end;
            while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
        }
        if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
            std::size_t exp = end + 1;
            if (exp < src_.size() && (src_[exp] == '+' || src_[exp] == '-')) ++exp;
            if (exp < src_.size() && std::isdigit(static_cast<unsigned char>(src_[exp]))) {
                ++exp;
                while (exp < src_.size() && std::isdigit(static_cast<unsigned char>(src_[exp]))) ++exp;
                end = exp;
            }
        }
        const std::string text = src_.substr(start, end - start);
        errno = 0;
        char* parse_end = nullptr;
        const double value = std::strtod(text.c_str(), &parse_end);
        if (parse_end != text.c_str() + text.size() || errno == ERANGE)
            throw ExprError(ExprError::Kind::lex, "bad numeric literal '" + text + "'", start);
        pos_ = end;
        return {Token::Kind::number, text, value, start};
    }

    const std::string& src_;
    std::size_t pos_ = 0;
};

ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

class Parser {
public:
    explicit Parser(const std::string& src) : lexer_(src) { advance(); }

    ExprPtr parse_full() {
        ExprPtr e = comparison();
        if (current_.kind != Token::Kind::end)
            throw ExprError(ExprError::Kind::syntax, "trailing input", current_.pos);
        return e;
    }

private:
    void advance() { current_ = lexer_.next(); }

    bool at_op(const char* text) const {
        return current_.kind == Token::Kind::op && current_.text == text;
    }

    // comparison := additive (('>' | '<') additive)?   -- no chaining
    ExprPtr comparison() {
        ExprPtr lhs = additive();
        if (at_op(">") || at_op("<")) {
            const BinaryOp op = at_op(">") ? BinaryOp::greater : BinaryOp::less;
            advance();
            ExprPtr rhs = additive();
            if (at_op(">") || at_op("<"))
                throw ExprError(ExprError::Kind::syntax, "chained comparison", current_.pos);
            return make({BinaryNode{op, lhs, rhs}});
        }
        return lhs;
    }

    ExprPtr additive() {
        ExprPtr lhs = multiplicative();
        while (at_op("+") || at_op("-")) {
            const BinaryOp op = at_op("+") ? BinaryOp::add : BinaryOp::subtract;
            advance();
            lhs = make({BinaryNode{op, lhs, multiplicative()}});
        }
        return lhs;
    }

    ExprPtr multiplicative() {
        ExprPtr lhs = unary();
        while (at_op("*") || at_op("/")) {
            const BinaryOp op = at_op("*") ? BinaryOp::multiply : BinaryOp::divide;
            advance();
            lhs = make({BinaryNode{op, lhs, unary()}});
        }
        return lhs;
    }

    ExprPtr unary() {
        if (at_op("-")) {
            advance();
            return make({UnaryNode{UnaryOp::negate, unary()}});
        }
        if (at_op("+")) { // unary plus is a no-op
            advance();
            return unary();
        }
        return power();
    }

    // power := primary ('**' unary)?   -- right associative, binds above unary minus
    ExprPtr power() {
        ExprPtr base = primary();
        if (at_op("**")) {
            advance();
            return make({BinaryNode{BinaryOp::power, base, unary()}});
        }
        return base;
    }

    ExprPtr primary() {
        if (current_.kind == Token::Kind::number) {
            const double v = current_.number;
            advance();
            return make({NumberNode{v}});
        }
        if (current_.kind == Token::Kind::lparen) {
            advance();
            ExprPtr inner = comparison();
            if (current_.kind != Token::Kind::rparen)
                throw ExprError(ExprError::Kind::syntax, "expected ')'", current_.pos);
            advance();
            return inner;
        }
        if (current_.kind == Token::Kind::ident) {
            const std::string name = current_.text;
            const std::size_t pos = current_.pos;
            advance();
            if (current_.kind == Token::Kind::lparen) return call(name, pos);
            if (name == "N") return make({WindowMarkerNode{}});
            auto term = terminal_from_name(name);
            if (!term)
                throw ExprError(ExprError::Kind::unknown_symbol, "unknown symbol '" + name + "'",
                                pos);
            return make({TerminalNode{*term}});
        }
        throw ExprError(ExprError::Kind::syntax, "expected expression", current_.pos);
    }

    ExprPtr call(const std::string& name, std::size_t pos) {
        const FuncEntry* entry = nullptr;
        for (const auto& e : kFuncs) {
            if (name == e.name) {
                entry = &e;
                break;
            }
        }
        if (!entry)
            throw ExprError(ExprError::Kind::unknown_function, "unknown function '" + name + "'",
                            pos);
        advance(); // '('
        std::vector<ExprPtr> args;
        if (current_.kind != Token::Kind::rparen) {
            args.push_back(comparison());
            while (current_.kind == Token::Kind::comma) {
                advance();
                args.push_back(comparison());
            }
        }
        if (current_.kind != Token::Kind::rparen)
            throw ExprError(ExprError::Kind::syntax, "expected ')'", current_.pos);
        advance();
        const int n = static_cast<int>(args.size());
        if (n < entry->min_arity || n > entry->max_arity)
            throw ExprError(ExprError::Kind::arity,
                            std::string(entry->name) + " takes " +
                                std::to_string(entry->min_arity) +
                                (entry->min_arity == entry->max_arity
                                     ? ""
                                     : ".." + std::to_string(entry->max_arity)) +
                                " arguments, got " + std::to_string(n),
                            pos);
        if (n == 2 && entry->window != FuncEntry::Window::none)
            check_window(*entry, *args[1], pos);
        return make({CallNode{entry->value, std::move(args)}});
    }

    void check_window(const FuncEntry& entry, const Expr& arg, std::size_t pos) {
        if (std::holds_alternative<WindowMarkerNode>(arg.node)) {
            if (entry.window == FuncEntry::Window::literal_ge1_or_marker) return;
            throw ExprError(ExprError::Kind::non_literal_window,
                            std::string(entry.name) + " window must be a literal", pos);
        }
        const auto* num = std::get_if<NumberNode>(&arg.node);
        if (!num || num->value != std::floor(num->value))
            throw ExprError(ExprError::Kind::non_literal_window,
                            std::string(entry.name) + " window must be an integer literal", pos);
        const double minimum = entry.window == FuncEntry::Window::literal_ge0 ? 0.0 : 1.0;
        if (num->value < minimum)
            throw ExprError(ExprError::Kind::non_literal_window,
                            std::string(entry.name) + " window out of range", pos);
    }

    Lexer lexer_;
    Token current_{Token::Kind::end, "", 0.0, 0};
};

int precedence_of(const Expr& e) {
    if (const auto* b = std::get_if<BinaryNode>(&e.node)) {
        switch (b->op) {
        case BinaryOp::greater:
        case BinaryOp::less: return 1;
        case BinaryOp::add:
        case BinaryOp::subtract: return 2;
        case BinaryOp::multiply:
        case BinaryOp::divide: return 3;
        case BinaryOp::power: return 5;
        }
    }
    if (std::holds_alternative<UnaryNode>(e.node)) return 4;
    return 6;
}

const char* op_text(BinaryOp op) {
    switch (op) {
    case BinaryOp::add: return "+";
    case BinaryOp::subtract: return "-";
    case BinaryOp::multiply: return "*";
    case BinaryOp::divide: return "/";
    case BinaryOp::power: return "**";
    case BinaryOp::greater: return ">";
    case BinaryOp::less: return "<";
    }
    return "?";
}

void render_into(const Expr& e, std::string& out);

void render_child(const Expr& child, int parent_prec, bool needs_parens_at_equal,
                  std::string& out) {
    const int child_prec = precedence_of(child);
    const bool parens = child_prec < parent_prec || (child_prec == parent_prec && needs_parens_at_equal);
    if (parens) out += '(';
    render_into(child, out);
    if (parens) out += ')';
}

void render_into(const Expr& e, std::string& out) {
    if (const auto* t = std::get_if<TerminalNode>(&e.node)) {
        out += terminal_name(t->symbol);
        return;
    }
    if (const auto* n = std::get_if<NumberNode>(&e.node)) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", n->value);
        out += buf;
        return;
    }
    if (std::holds_alternative<WindowMarkerNode>(e.node)) {
        out += 'N';
        return;
    }
    if (const auto* u = std::get_if<UnaryNode>(&e.node)) {
        out += '-';
        render_child(*u->operand, 4, false, out);
        return;
    }
    if (const auto* b = std::get_if<BinaryNode>(&e.node)) {
        const int prec = precedence_of(e);
        if (b->op == BinaryOp::power) {
            // right associative: parenthesize an equal-precedence lhs
            render_child(*b->lhs, prec, true, out);
            out += op_text(b->op);
            render_child(*b->rhs, prec, false, out);
        } else {
            render_child(*b->lhs, prec, false, out);
            out += op_text(b->op);
            render_child(*b->rhs, prec, true, out);
        }
        return;
    }
    const auto& c = std::get<CallNode>(e.node);
    out += func_name(c.function);
    out += '(';
    for (std::size_t i = 0; i < c.args.size(); ++i) {
        if (i) out += ',';
        render_into(*c.args[i], out);
    }
    out += ')';
}

void collect_terminals(const Expr& e, std::set<Terminal>& out) {
    if (const auto* t = std::get_if<TerminalNode>(&e.node)) {
        out.insert(t->symbol);
    } else if (const auto* u = std::get_if<UnaryNode>(&e.node)) {
        collect_terminals(*u->operand, out);
    } else if (const auto* b = std::get_if<BinaryNode>(&e.node)) {
        collect_terminals(*b->lhs, out);
        collect_terminals(*b->rhs, out);
    } else if (const auto* c = std::get_if<CallNode>(&e.node)) {
        for (const auto& a : c->args) collect_terminals(*a, out);
    }
}

// Minimum accumulated DELAY along any path to each terminal.
void collect_min_lag(const Expr& e, int lag, std::map<Terminal, int>& out) {
    if (const auto* t = std::get_if<TerminalNode>(&e.node)) {
        auto it = out.find(t->symbol);
        if (it == out.end() || lag < it->second) out[t->symbol] = lag;
    } else if (const auto* u = std::get_if<UnaryNode>(&e.node)) {
        collect_min_lag(*u->operand, lag, out);
    } else if (const auto* b = std::get_if<BinaryNode>(&e.node)) {
        collect_min_lag(*b->lhs, lag, out);
        collect_min_lag(*b->rhs, lag, out);
    } else if (const auto* c = std::get_if<CallNode>(&e.node)) {
        int extra = 0;
        if (c->function == Func::delay) {
            if (const auto* n = std::get_if<NumberNode>(&c->args[1]->node))
                extra = static_cast<int>(n->value);
        }
        collect_min_lag(*c->args[0], lag + extra, out);
        for (std::size_t i = 1; i < c->args.size(); ++i) collect_min_lag(*c->args[i], lag, out);
    }
}

} // namespace

const char* terminal_name(Terminal t) {
    for (const auto& e : kTerminals)
        if (e.value == t) return e.name;
    return "?";
}

std::optional<Terminal> terminal_from_name(const std::string& name) {
    for (const auto& e : kTerminals)
        if (name == e.name) return e.value;
    return std::nullopt;
}

const char* func_name(Func f) { return func_entry(f).name; }

bool equal(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index()) return false;
    if (const auto* t = std::get_if<TerminalNode>(&a.node))
        return t->symbol == std::get<TerminalNode>(b.node).symbol;
    if (const auto* n = std::get_if<NumberNode>(&a.node))
        return n->value == std::get<NumberNode>(b.node).value;
    if (std::holds_alternative<WindowMarkerNode>(a.node)) return true;
    if (const auto* u = std::get_if<UnaryNode>(&a.node)) {
        const auto& v = std::get<UnaryNode>(b.node);
        return u->op == v.op && equal(*u->operand, *v.operand);
    }
    if (const auto* x = std::get_if<BinaryNode>(&a.node)) {
        const auto& y = std::get<BinaryNode>(b.node);
        return x->op == y.op && equal(*x->lhs, *y.lhs) && equal(*x->rhs, *y.rhs);
    }
    const auto& c = std::get<CallNode>(a.node);
    const auto& d = std::get<CallNode>(b.node);
    if (c.function != d.function || c.args.size() != d.args.size()) return false;
    for (std::size_t i = 0; i < c.args.size(); ++i)
        if (!equal(*c.args[i], *d.args[i])) return false;
    return true;
}

ExprPtr parse(const std::string& source) { return Parser(source).parse_full(); }

std::string render(const Expr& expr) {
    std::string out;
    render_into(expr, out);
    return out;
}

std::vector<Terminal> terminals_of(const Expr& expr) {
    std::set<Terminal> set;
    collect_terminals(expr, set);
    return {set.begin(), set.end()};
}

std::vector<Terminal> day_zero_reads(const Expr& expr) {
    std::map<Terminal, int> lags;
    collect_min_lag(expr, 0, lags);
    std::vector<Terminal> out;
    for (const auto& [term, lag] : lags)
        if (lag == 0) out.push_back(term);
    return out;
}

} // namespace qbk::dsl
