#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace qbk {

/// Date-aligned numeric series. Entries may be undefined (factor warm-up,
/// division by zero); undefined is carried as quiet NaN but every operation
/// tests definedness explicitly rather than leaning on IEEE propagation, so
/// comparisons and selections stay strict: any undefined operand yields an
/// undefined result.
class Series {
public:
    Series() = default;
    explicit Series(std::size_t n) : values_(n, undefined_value()) {}
    explicit Series(std::vector<double> values) : values_(std::move(values)) {}

    static double undefined_value() { return std::numeric_limits<double>::quiet_NaN(); }
    static bool is_defined(double v) { return !std::isnan(v); }

    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    bool defined(std::size_t i) const { return is_defined(values_[i]); }
    void set_undefined(std::size_t i) { values_[i] = undefined_value(); }

    std::size_t defined_count() const {
        std::size_t n = 0;
        for (double v : values_)
            if (is_defined(v)) ++n;
        return n;
    }

    const std::vector<double>& values() const { return values_; }

    bool operator==(const Series& other) const {
        if (values_.size() != other.values_.size()) return false;
        for (std::size_t i = 0; i < values_.size(); ++i) {
            const bool da = is_defined(values_[i]);
            const bool db = is_defined(other.values_[i]);
            if (da != db) return false;
            if (da && values_[i] != other.values_[i]) return false;
        }
        return true;
    }

private:
    std::vector<double> values_;
};

} // namespace qbk
