#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "spikecast/error.hpp"

namespace spikecast {

// Seconds since the Unix epoch, always UTC.
struct UtcTime {
    std::int64_t seconds = 0;

    friend constexpr auto operator<=>(UtcTime, UtcTime) = default;

    constexpr UtcTime plus_seconds(std::int64_t s) const { return UtcTime{seconds + s}; }
    constexpr UtcTime plus_minutes(double m) const {
        return UtcTime{seconds + static_cast<std::int64_t>(m * 60.0)};
    }
};

constexpr double minutes_between(UtcTime from, UtcTime to) {
    return static_cast<double>(to.seconds - from.seconds) / 60.0;
}

inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr std::int64_t kSecondsPerWeek = 7 * kSecondsPerDay;

struct CivilDate {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;

    friend constexpr auto operator<=>(const CivilDate&, const CivilDate&) = default;
};

// Howard Hinnant's days_from_civil.
constexpr std::int64_t days_from_civil(CivilDate d) {
    const std::int64_t y = static_cast<std::int64_t>(d.year) - (d.month <= 2 ? 1 : 0);
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned mp = d.month > 2 ? d.month - 3 : d.month + 9;
    const unsigned doy = (153 * mp + 2) / 5 + d.day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

constexpr CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return CivilDate{static_cast<int>(y + (m <= 2 ? 1 : 0)), m, d};
}

constexpr bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

constexpr unsigned days_in_month(int y, unsigned m) {
    constexpr unsigned table[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && is_leap(y) ? 29u : table[m - 1];
}

// 0 = Monday ... 6 = Sunday.
constexpr int weekday_of(UtcTime t) {
    std::int64_t days = t.seconds >= 0 ? t.seconds / kSecondsPerDay
                                       : -((-t.seconds + kSecondsPerDay - 1) / kSecondsPerDay);
    // 1970-01-01 was a Thursday.
    return static_cast<int>(((days % 7) + 7 + 3) % 7);
}

constexpr std::int64_t seconds_of_day(UtcTime t) {
    return ((t.seconds % kSecondsPerDay) + kSecondsPerDay) % kSecondsPerDay;
}

namespace detail {

inline bool parse_uint(std::string_view s, unsigned& out) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace detail

// Strict YYYY-MM-DD.
inline std::optional<CivilDate> parse_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    unsigned y = 0, m = 0, d = 0;
    if (!detail::parse_uint(s.substr(0, 4), y) || !detail::parse_uint(s.substr(5, 2), m) ||
        !detail::parse_uint(s.substr(8, 2), d))
        return std::nullopt;
    if (m < 1 || m > 12 || d < 1 || d > days_in_month(static_cast<int>(y), m)) return std::nullopt;
    return CivilDate{static_cast<int>(y), m, d};
}

inline std::string format_iso_date(CivilDate d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", d.year, d.month, d.day);
    return buf;
}

struct TimeOfDay {
    int minutes = 0;                       // minutes after local midnight
    std::optional<int> utc_offset_minutes;  // present when the string carried a zone
};

// Accepts HH:MM, HH:MM:SS, optionally followed by Z or ±HH:MM.
inline std::optional<TimeOfDay> parse_time_of_day(std::string_view s) {
    if (s.size() < 5 || s[2] != ':') return std::nullopt;
    unsigned h = 0, m = 0, sec = 0;
    if (!detail::parse_uint(s.substr(0, 2), h) || !detail::parse_uint(s.substr(3, 2), m))
        return std::nullopt;
    std::size_t pos = 5;
    if (s.size() >= 8 && s[5] == ':') {
        if (!detail::parse_uint(s.substr(6, 2), sec)) return std::nullopt;
        pos = 8;
    }
    if (h > 23 || m > 59 || sec > 59) return std::nullopt;
    TimeOfDay out{static_cast<int>(h * 60 + m), std::nullopt};
    std::string_view zone = s.substr(pos);
    if (zone.empty()) return out;
    if (zone == "Z" || zone == "z") {
        out.utc_offset_minutes = 0;
        return out;
    }
    if (zone.size() == 6 && (zone[0] == '+' || zone[0] == '-') && zone[3] == ':') {
        unsigned oh = 0, om = 0;
        if (!detail::parse_uint(zone.substr(1, 2), oh) || !detail::parse_uint(zone.substr(4, 2), om) ||
            oh > 14 || om > 59)
            return std::nullopt;
        int off = static_cast<int>(oh * 60 + om);
        out.utc_offset_minutes = zone[0] == '-' ? -off : off;
        return out;
    }
    return std::nullopt;
}

inline UtcTime utc_from_civil(CivilDate d, std::int64_t second_of_day = 0) {
    return UtcTime{days_from_civil(d) * kSecondsPerDay + second_of_day};
}

inline CivilDate civil_date_of(UtcTime t) {
    std::int64_t days = (t.seconds - seconds_of_day(t)) / kSecondsPerDay;
    return civil_from_days(days);
}

// YYYY-MM-DDTHH:MM:SSZ
inline std::string format_utc(UtcTime t) {
    CivilDate d = civil_date_of(t);
    std::int64_t sod = seconds_of_day(t);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", d.year, d.month, d.day,
                  static_cast<int>(sod / 3600), static_cast<int>((sod / 60) % 60),
                  static_cast<int>(sod % 60));
    return buf;
}

// Parses YYYY-MM-DDTHH:MM[:SS][Z|±HH:MM] (space also accepted as separator).
// A missing zone means UTC.
inline std::optional<UtcTime> parse_utc(std::string_view s) {
    if (s.size() < 16 || (s[10] != 'T' && s[10] != ' ')) return std::nullopt;
    auto date = parse_iso_date(s.substr(0, 10));
    auto tod = parse_time_of_day(s.substr(11));
    if (!date || !tod) return std::nullopt;
    std::int64_t secs = static_cast<std::int64_t>(tod->minutes) * 60;
    if (s.size() >= 19 && s[16] == ':') {
        unsigned sec = 0;
        detail::parse_uint(s.substr(17, 2), sec);
        secs += sec;
    }
    UtcTime t = utc_from_civil(*date, secs);
    return t.plus_seconds(-static_cast<std::int64_t>(tod->utc_offset_minutes.value_or(0)) * 60);
}

inline UtcTime parse_utc_or_throw(std::string_view s, const std::string& field) {
    auto t = parse_utc(s);
    if (!t) throw ValidationError(field, "not a UTC timestamp: '" + std::string(s) + "'");
    return *t;
}

}  // namespace spikecast
