#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace qbk::dsl {

/// Data-column and portfolio-state symbols the expression language reads.
enum class Terminal {
    open,
    high,
    low,
    close,
    volume,
    amount,
    percentage_change,
    pv,
    cash,
    position,
    pnl,
    initial_capital,
    cash_final,
    position_final,
};

const char* terminal_name(Terminal t);
std::optional<Terminal> terminal_from_name(const std::string& name);

enum class UnaryOp { negate };
enum class BinaryOp { add, subtract, multiply, divide, power, greater, less };

enum class Func {
    delay,
    sma,
    ema,
    stddev,
    variance,
    skew,
    max,
    min,
    abs,
    sum,
    if_then_else,
    sign,
    sqrt,
    pow,
    linearreg_slope,
    cummax,
    mean,
    count,
    first,
    last,
};

const char* func_name(Func f);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct TerminalNode {
    Terminal symbol;
};
struct NumberNode {
    double value;
};
/// The symbolic whole-series window marker ('N') accepted as the window
/// argument of reduction-capable rolling functions.
struct WindowMarkerNode {};
struct UnaryNode {
    UnaryOp op;
    ExprPtr operand;
};
struct BinaryNode {
    BinaryOp op;
    ExprPtr lhs;
    ExprPtr rhs;
};
struct CallNode {
    Func function;
    std::vector<ExprPtr> args;
};

struct Expr {
    std::variant<TerminalNode, NumberNode, WindowMarkerNode, UnaryNode, BinaryNode, CallNode> node;
};

bool equal(const Expr& a, const Expr& b);

struct ExprError : std::runtime_error {
    enum class Kind {
        lex,
        syntax,
        unknown_function,
        unknown_symbol,
        arity,
        non_literal_window,
    };
    ExprError(Kind k, const std::string& message, std::size_t position)
        : std::runtime_error(message), kind(k), pos(position) {}
    Kind kind;
    std::size_t pos;
};

/// Parses the factor/KPI expression language: operators + - * / ** > <,
/// parentheses, numeric literals (including scientific notation), the
/// terminals above, and the fixed-arity function table. Whitespace-
/// insensitive. Window arguments must be non-negative integer literals
/// (DELAY accepts 0; rolling windows need >= 1); reduction-capable
/// functions also accept the marker N for "whole series".
ExprPtr parse(const std::string& source);

/// Canonical rendering; render(parse(s)) re-parses to an equal AST.
std::string render(const Expr& expr);
inline std::string render(const ExprPtr& expr) { return render(*expr); }

/// All terminals referenced anywhere in the expression.
std::vector<Terminal> terminals_of(const Expr& expr);

/// Terminals reachable with zero accumulated DELAY shift, i.e. the fields
/// the expression reads on the evaluation day itself. Rolling windows do
/// not add lag (a window ending at t reads day t); only DELAY does.
std::vector<Terminal> day_zero_reads(const Expr& expr);

} // namespace qbk::dsl
