#include "engage/dates.hpp"

#include <cctype>
#include <cstdio>

namespace engage {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

int to_int(std::string_view s) {
    int v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v;
}

}  // namespace

std::optional<Date> Date::parse(std::string_view text) {
    int y;
    unsigned m, d;
    if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
        const auto ys = text.substr(0, 4), ms = text.substr(5, 2), ds = text.substr(8, 2);
        if (!all_digits(ys) || !all_digits(ms) || !all_digits(ds)) return std::nullopt;
        y = to_int(ys);
        m = static_cast<unsigned>(to_int(ms));
        d = static_cast<unsigned>(to_int(ds));
    } else if (text.size() == 8 && all_digits(text)) {
        y = to_int(text.substr(0, 4));
        m = static_cast<unsigned>(to_int(text.substr(4, 2)));
        d = static_cast<unsigned>(to_int(text.substr(6, 2)));
    } else {
        return std::nullopt;
    }
    const auto ymd = std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d};
    if (!ymd.ok()) return std::nullopt;
    return Date{y, m, d};
}

std::string Date::to_iso() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", year, month, day);
    return buf;
}

}  // namespace engage
