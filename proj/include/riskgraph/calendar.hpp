#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace riskgraph::cal {

/// Days since 1970-01-01 (may be negative).
using Day = std::int64_t;

struct CivilDate {
    int year;
    unsigned month;  // 1..12
    unsigned day;    // 1..31
};

Day days_from_civil(int year, unsigned month, unsigned day);
CivilDate civil_from_days(Day z);

/// Parses ISO-8601 "YYYY-MM-DD". Throws std::invalid_argument on malformed input.
Day parse_iso_date(std::string_view s);
std::string format_iso_date(Day d);

/// 0 = Monday .. 6 = Sunday.
int weekday_index(Day d);
bool is_weekend(Day d);

}  // namespace riskgraph::cal
