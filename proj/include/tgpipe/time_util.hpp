#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace tgpipe {

// Days since 1970-01-01 for a proleptic Gregorian date. Howard Hinnant's
// civil_from_days / days_from_civil pair.
inline int64_t days_from_civil(int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

inline void civil_from_days(int64_t z, int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

// Accepts RFC-3339 with numeric offset or 'Z' ("2024-08-01T00:00:00+00:00"),
// or a plain integer of Unix seconds. Returns Unix seconds UTC.
inline std::optional<int64_t> parse_timestamp(std::string_view s) {
    if (s.empty()) return std::nullopt;

    auto all_digits = [](std::string_view v) {
        if (v.empty()) return false;
        for (char c : v)
            if (!std::isdigit(static_cast<unsigned char>(c))) return false;
        return true;
    };
    {
        std::string_view body = s;
        bool neg = false;
        if (body.front() == '-') { neg = true; body.remove_prefix(1); }
        if (all_digits(body)) {
            int64_t v = 0;
            for (char c : body) {
                if (v > (INT64_MAX - 9) / 10) return std::nullopt;
                v = v * 10 + (c - '0');
            }
            return neg ? -v : v;
        }
    }

    // YYYY-MM-DD[T ]hh:mm:ss[.frac](Z|±hh:mm|±hhmm)
    int y, mo, d, h, mi, sec;
    int n = 0;
    if (std::sscanf(std::string(s).c_str(), "%4d-%2d-%2d%*1[T t]%2d:%2d:%2d%n",
                    &y, &mo, &d, &h, &mi, &sec, &n) != 6 || n < 19)
        return std::nullopt;
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60)
        return std::nullopt;

    std::string_view rest = s.substr(static_cast<size_t>(n));
    if (!rest.empty() && rest.front() == '.') {
        rest.remove_prefix(1);
        while (!rest.empty() && std::isdigit(static_cast<unsigned char>(rest.front())))
            rest.remove_prefix(1);
    }
    int64_t offset_s = 0;
    if (rest.empty()) {
        // no offset: treat as UTC
    } else if (rest == "Z" || rest == "z") {
        // UTC
    } else if (rest.front() == '+' || rest.front() == '-') {
        int oh, om;
        int sign = rest.front() == '+' ? 1 : -1;
        std::string tail(rest.substr(1));
        if (std::sscanf(tail.c_str(), "%2d:%2d", &oh, &om) == 2 ||
            std::sscanf(tail.c_str(), "%2d%2d", &oh, &om) == 2) {
            offset_s = sign * (oh * 3600LL + om * 60LL);
        } else if (std::sscanf(tail.c_str(), "%2d", &oh) == 1 && tail.size() == 2) {
            offset_s = sign * oh * 3600LL;
        } else {
            return std::nullopt;
        }
    } else {
        return std::nullopt;
    }

    int64_t days = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
    return days * 86400 + h * 3600 + mi * 60 + sec - offset_s;
}

inline std::string format_rfc3339(int64_t unix_s) {
    int64_t days = unix_s / 86400;
    int64_t rem = unix_s % 86400;
    if (rem < 0) { rem += 86400; days -= 1; }
    int64_t y;
    unsigned mo, d;
    civil_from_days(days, y, mo, d);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lld+00:00",
                  static_cast<long long>(y), mo, d,
                  static_cast<long long>(rem / 3600),
                  static_cast<long long>((rem / 60) % 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

// YYYY-MM-DD in UTC, used for daily binning.
inline std::string format_date(int64_t unix_s) {
    return format_rfc3339(unix_s).substr(0, 10);
}

}  // namespace tgpipe
