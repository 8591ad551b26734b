#include "trendlab/core.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace trendlab {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

bool is_leap(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

int days_in_month(int y, int m) {
    static constexpr std::array<int, 12> lengths = {31, 28, 31, 30, 31, 30,
                                                    31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return lengths[static_cast<std::size_t>(m - 1)];
}

} // namespace

Date Date::parse(const std::string& iso) {
    auto fail = [&] {
        throw std::runtime_error("invalid ISO-8601 date: '" + iso + "'");
    };
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') fail();
    Date d;
    auto num = [&](std::size_t begin, std::size_t len, int& out) {
        const char* first = iso.data() + begin;
        auto [ptr, ec] = std::from_chars(first, first + len, out);
        if (ec != std::errc() || ptr != first + len) fail();
    };
    num(0, 4, d.year);
    num(5, 2, d.month);
    num(8, 2, d.day);
    if (d.month < 1 || d.month > 12) fail();
    if (d.day < 1 || d.day > days_in_month(d.year, d.month)) fail();
    return d;
}

// Howard Hinnant's civil-day conversions.
std::int64_t Date::to_days() const {
    const int y = year - (month <= 2 ? 1 : 0);
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy =
        static_cast<unsigned>((153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date Date::from_days(std::int64_t days) {
    const std::int64_t z = days + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(y + (m <= 2 ? 1 : 0)), static_cast<int>(m),
                static_cast<int>(d)};
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return std::string(buf);
}

} // namespace trendlab
