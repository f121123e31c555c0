#pragma once

#include "qbk/expr.hpp"
#include "qbk/series.hpp"

#include <map>
#include <optional>
#include <stdexcept>

namespace qbk::dsl {

struct EvalError : std::runtime_error {
    enum class Kind { unbound_symbol, length_mismatch, unresolved_window, bad_operand };
    EvalError(Kind k, const std::string& message) : std::runtime_error(message), kind(k) {}
    Kind kind;
};

/// Terminal bindings for one evaluation. Series bindings must share a
/// length within any single expression that uses them; scalar bindings
/// broadcast. Immutable while evaluations run.
class Env {
public:
    Env& bind(Terminal t, Series s) {
        series_.insert_or_assign(t, std::move(s));
        return *this;
    }
    Env& bind(Terminal t, double scalar) {
        scalars_.insert_or_assign(t, scalar);
        return *this;
    }

    const Series* find_series(Terminal t) const {
        auto it = series_.find(t);
        return it == series_.end() ? nullptr : &it->second;
    }
    const double* find_scalar(Terminal t) const {
        auto it = scalars_.find(t);
        return it == scalars_.end() ? nullptr : &it->second;
    }

    /// Length used to broadcast a scalar-valued expression in evaluate().
    std::size_t default_length() const {
        return series_.empty() ? 0 : series_.begin()->second.size();
    }

private:
    std::map<Terminal, Series> series_;
    std::map<Terminal, double> scalars_;
};

/// Evaluates to a date-aligned series of the bound length. Entries are
/// undefined inside rolling warm-up windows and wherever any contributing
/// input entry is undefined (strict propagation); division by zero and
/// domain errors yield undefined entries rather than signalling.
Series evaluate(const Expr& expr, const Env& env);
inline Series evaluate(const ExprPtr& expr, const Env& env) { return evaluate(*expr, env); }

/// Collapses a KPI-style expression to a single value. Full-series
/// reductions (arity-1 MAX/MIN/MEAN/STD/SUM/COUNT/FIRST/LAST, or a rolling
/// form whose window is the marker N) drop undefined entries first; if the
/// expression still evaluates to a series, its last defined entry is taken
/// (the value the expression carries at the end of the window). Returns
/// nullopt when the outcome is undefined (empty reduction, zero
/// denominator, and so on) — never NaN.
std::optional<double> reduce(const Expr& expr, const Env& env);
inline std::optional<double> reduce(const ExprPtr& expr, const Env& env) {
    return reduce(*expr, env);
}

} // namespace qbk::dsl
