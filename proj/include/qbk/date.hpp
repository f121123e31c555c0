#pragma once

#include <compare>
#include <optional>
#include <string>

namespace qbk {

/// Calendar date, ISO-8601 in files. No calendar arithmetic is performed;
/// series are indexed by trading-day position, dates only order and filter.
struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    auto operator<=>(const Date&) const = default;

    /// Parses "YYYY-MM-DD". Returns nullopt on malformed input or
    /// out-of-range month/day (day-of-month validity is checked against
    /// the Gregorian calendar, leap years included).
    static std::optional<Date> parse(const std::string& text);

    /// Formats as "YYYY-MM-DD".
    std::string to_string() const;
};

} // namespace qbk
