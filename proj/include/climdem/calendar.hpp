#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace climdem {

using Date = std::chrono::sys_days;

/// Parses YYYY-MM-DD. Throws Error(Ingestion) on malformed or impossible dates.
[[nodiscard]] Date parse_iso_date(std::string_view text);
[[nodiscard]] std::string format_iso_date(Date d);

[[nodiscard]] inline bool is_monday(Date d) {
    return std::chrono::weekday{d} == std::chrono::Monday;
}

/// True when the 7-day week starting at `week_start` contains month/day.
[[nodiscard]] bool week_contains(Date week_start, std::chrono::month m, std::chrono::day d);

}  // namespace climdem
