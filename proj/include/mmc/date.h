/// @file date.h
/// @brief Calendar dates and date-times used for windowing

#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace mmc {

/// Calendar day, stored as days since 1970-01-01.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::int32_t days_since_epoch) : days_(days_since_epoch) {}
    Date(int year, unsigned month, unsigned day);

    /// Parses "YYYY-MM-DD". Throws Error(kParse).
    static Date Parse(std::string_view text);

    constexpr std::int32_t days() const { return days_; }
    std::string ToString() const;

    constexpr Date operator+(std::int32_t n) const { return Date(days_ + n); }
    constexpr Date operator-(std::int32_t n) const { return Date(days_ - n); }
    constexpr std::int32_t operator-(Date other) const { return days_ - other.days_; }

    constexpr auto operator<=>(const Date&) const = default;

private:
    std::int32_t days_ = 0;
};

/// A date plus seconds into that day.
struct Timestamp {
    Date date;
    std::int32_t seconds = 0;  // [0, 86400)

    /// Accepts "YYYY-MM-DD" or "YYYY-MM-DDTHH:MM:SS".
    static Timestamp Parse(std::string_view text);
    std::string ToString() const;

    auto operator<=>(const Timestamp&) const = default;
};

}  // namespace mmc
