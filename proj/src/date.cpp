/// @file date.cpp
/// @brief Calendar date parsing and formatting

#include "mmc/date.h"

#include <charconv>
#include <cstdio>

#include "mmc/error.h"

namespace mmc {

namespace {

int ParseInt(std::string_view text, std::string_view whole) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw Error(ErrorCode::kParse, "bad date/time '" + std::string(whole) + "'");
    }
    return value;
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
    using namespace std::chrono;
    year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok()) {
        throw Error(ErrorCode::kParse, "invalid calendar date");
    }
    days_ = static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count());
}

Date Date::Parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw Error(ErrorCode::kParse, "bad date '" + std::string(text) + "'");
    }
    int y = ParseInt(text.substr(0, 4), text);
    int m = ParseInt(text.substr(5, 2), text);
    int d = ParseInt(text.substr(8, 2), text);
    if (m < 1 || m > 12 || d < 1 || d > 31) {
        throw Error(ErrorCode::kParse, "bad date '" + std::string(text) + "'");
    }
    return Date(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

std::string Date::ToString() const {
    using namespace std::chrono;
    year_month_day ymd{sys_days{std::chrono::days{days_}}};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

Timestamp Timestamp::Parse(std::string_view text) {
    Timestamp ts;
    ts.date = Date::Parse(text.substr(0, std::min<std::size_t>(10, text.size())));
    if (text.size() == 10) {
        return ts;
    }
    if (text.size() != 19 || (text[10] != 'T' && text[10] != ' ') || text[13] != ':' ||
        text[16] != ':') {
        throw Error(ErrorCode::kParse, "bad timestamp '" + std::string(text) + "'");
    }
    int hh = ParseInt(text.substr(11, 2), text);
    int mm = ParseInt(text.substr(14, 2), text);
    int ss = ParseInt(text.substr(17, 2), text);
    if (hh > 23 || mm > 59 || ss > 59) {
        throw Error(ErrorCode::kParse, "bad timestamp '" + std::string(text) + "'");
    }
    ts.seconds = hh * 3600 + mm * 60 + ss;
    return ts;
}

std::string Timestamp::ToString() const {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "T%02d:%02d:%02d", seconds / 3600, (seconds / 60) % 60,
                  seconds % 60);
    return date.ToString() + buf;
}

}  // namespace mmc
