#ifndef ENGAGE_DATES_HPP
#define ENGAGE_DATES_HPP

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace engage {

// Calendar date. Accepts exactly two input forms: ISO-8601 "YYYY-MM-DD" and
// compact "YYYYMMDD". Anything else is rejected.
struct Date {
    int year = 1970;
    unsigned month = 1;  // 1..12
    unsigned day = 1;    // 1..31

    static std::optional<Date> parse(std::string_view text);

    static Date from_days(std::chrono::sys_days days) {
        const std::chrono::year_month_day ymd{days};
        return Date{static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                    static_cast<unsigned>(ymd.day())};
    }

    std::chrono::sys_days to_days() const {
        return std::chrono::sys_days{std::chrono::year{year} / std::chrono::month{month} /
                                     std::chrono::day{day}};
    }

    // Days since 1970-01-01; negative before it.
    std::int64_t serial_day() const { return to_days().time_since_epoch().count(); }

    // Monday = 0 .. Sunday = 6.
    int day_of_week() const {
        return static_cast<int>(std::chrono::weekday{to_days()}.iso_encoding()) - 1;
    }

    std::string to_iso() const;

    auto operator<=>(const Date& other) const { return serial_day() <=> other.serial_day(); }
    bool operator==(const Date& other) const {
        return year == other.year && month == other.month && day == other.day;
    }
};

}  // namespace engage

#endif
