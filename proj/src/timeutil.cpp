#include "roadcast/timeutil.hpp"

#include <cstdio>
#include <cstdlib>

namespace roadcast::timeutil {

// Howard Hinnant's public-domain civil calendar algorithms.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

std::int64_t unix_from_civil(int y, int m, int d) {
    return days_from_civil(y, m, d) * 86400;
}

std::optional<std::int64_t> parse_iso8601(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    const char* p = text.c_str();
    int n = 0;
    if (std::sscanf(p, "%d-%d-%d%n", &y, &mo, &d, &n) != 3) return std::nullopt;
    if (mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;
    p += n;
    if (*p == '\0') return unix_from_civil(y, mo, d);
    if (*p != 'T' && *p != ' ') return std::nullopt;
    ++p;
    if (std::sscanf(p, "%d:%d:%d%n", &h, &mi, &s, &n) != 3) {
        if (std::sscanf(p, "%d:%d%n", &h, &mi, &n) != 2) return std::nullopt;
        s = 0;
    }
    p += n;
    if (h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60) return std::nullopt;
    if (*p == '.') {  // drop fractional seconds
        ++p;
        while (*p >= '0' && *p <= '9') ++p;
    }
    std::int64_t offset = 0;
    if (*p == 'Z') {
        ++p;
    } else if (*p == '+' || *p == '-') {
        const int sign = (*p == '-') ? -1 : 1;
        ++p;
        int oh = 0, om = 0;
        if (std::sscanf(p, "%2d%n", &oh, &n) != 1) return std::nullopt;
        p += n;
        if (*p == ':') ++p;
        if (*p >= '0' && *p <= '9') {
            if (std::sscanf(p, "%2d%n", &om, &n) != 1) return std::nullopt;
            p += n;
        }
        offset = sign * (oh * 3600 + om * 60);
    } else {
        return std::nullopt;  // offset is required on timestamps
    }
    if (*p != '\0') return std::nullopt;
    return unix_from_civil(y, mo, d) + h * 3600 + mi * 60 + s - offset;
}

std::string format_iso8601(std::int64_t t) {
    std::int64_t days = t / 86400;
    std::int64_t rem = t % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                  static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                  static_cast<int>(rem % 60));
    return buf;
}

std::string format_date(std::int64_t t) {
    std::int64_t days = t / 86400;
    if (t % 86400 < 0) days -= 1;
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
    return buf;
}

int utc_month(std::int64_t t) {
    std::int64_t days = t / 86400;
    if (t % 86400 < 0) days -= 1;
    int y, m, d;
    civil_from_days(days, y, m, d);
    return m;
}

int utc_year(std::int64_t t) {
    std::int64_t days = t / 86400;
    if (t % 86400 < 0) days -= 1;
    int y, m, d;
    civil_from_days(days, y, m, d);
    return y;
}

}  // namespace roadcast::timeutil
