#include "riskgraph/calendar.hpp"

#include <charconv>
#include <stdexcept>

namespace riskgraph::cal {

// Civil-from-days / days-from-civil use the standard proleptic Gregorian
// era decomposition (400-year cycles of 146097 days).
Day days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);            // [0, 399]
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;  // [0, 365]
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;           // [0, 146096]
    return static_cast<Day>(era) * 146097 + static_cast<Day>(doe) - 719468;
}

CivilDate civil_from_days(Day z) {
    z += 719468;
    const Day era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return {y + (m <= 2), m, d};
}

namespace {

int parse_int_field(std::string_view s, std::size_t pos, std::size_t len) {
    int out = 0;
    const char* first = s.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, out);
    if (ec != std::errc{} || ptr != first + len)
        throw std::invalid_argument("bad date component in '" + std::string(s) + "'");
    return out;
}

}  // namespace

Day parse_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-')
        throw std::invalid_argument("expected ISO date YYYY-MM-DD, got '" + std::string(s) + "'");
    const int y = parse_int_field(s, 0, 4);
    const int m = parse_int_field(s, 5, 2);
    const int d = parse_int_field(s, 8, 2);
    if (m < 1 || m > 12 || d < 1 || d > 31)
        throw std::invalid_argument("date out of range: '" + std::string(s) + "'");
    const Day day = days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
    const CivilDate back = civil_from_days(day);
    if (back.year != y || back.month != static_cast<unsigned>(m) || back.day != static_cast<unsigned>(d))
        throw std::invalid_argument("invalid calendar date: '" + std::string(s) + "'");
    return day;
}

std::string format_iso_date(Day d) {
    const CivilDate c = civil_from_days(d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", c.year, c.month, c.day);
    return buf;
}

int weekday_index(Day d) {
    // 1970-01-01 was a Thursday; shift so 0 = Monday.
    return static_cast<int>(((d % 7) + 7 + 3) % 7);
}

bool is_weekend(Day d) {
    const int w = weekday_index(d);
    return w == 5 || w == 6;
}

}  // namespace riskgraph::cal
