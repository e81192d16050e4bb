#include "climdem/calendar.hpp"

#include <charconv>
#include <cstdio>

#include "climdem/error.hpp"

namespace climdem {

namespace {

int parse_field(std::string_view text, std::string_view whole) {
    int value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) fail(ErrorKind::Ingestion, "unparseable date '" + std::string(whole) + "'");
    return value;
}

}  // namespace

Date parse_iso_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        fail(ErrorKind::Ingestion, "unparseable date '" + std::string(text) + "' (expected YYYY-MM-DD)");
    const int y = parse_field(text.substr(0, 4), text);
    const int m = parse_field(text.substr(5, 2), text);
    const int d = parse_field(text.substr(8, 2), text);
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) fail(ErrorKind::Ingestion, "invalid calendar date '" + std::string(text) + "'");
    return Date{ymd};
}

std::string format_iso_date(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

bool week_contains(Date week_start, std::chrono::month m, std::chrono::day d) {
    for (int i = 0; i < 7; ++i) {
        const std::chrono::year_month_day ymd{week_start + std::chrono::days{i}};
        if (ymd.month() == m && ymd.day() == d) return true;
    }
    return false;
}

}  // namespace climdem
