#include "dynamo/time.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace dynamo {

namespace {

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += (m <= 2);
}

bool parse_uint(std::string_view s, std::size_t pos, std::size_t len, unsigned& out) {
    if (pos + len > s.size()) return false;
    unsigned v = 0;
    for (std::size_t i = 0; i < len; ++i) {
        const char c = s[pos + i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + static_cast<unsigned>(c - '0');
    }
    out = v;
    return true;
}

std::optional<Timestamp> parse_iso8601(std::string_view s) {
    // YYYY-MM-DD[T ]hh:mm:ss[.frac][Z|+hh:mm|-hh:mm]
    unsigned year, mon, day, hh, mm, ss;
    if (s.size() < 19) return std::nullopt;
    if (!parse_uint(s, 0, 4, year) || s[4] != '-' || !parse_uint(s, 5, 2, mon) ||
        s[7] != '-' || !parse_uint(s, 8, 2, day))
        return std::nullopt;
    if (s[10] != 'T' && s[10] != ' ') return std::nullopt;
    if (!parse_uint(s, 11, 2, hh) || s[13] != ':' || !parse_uint(s, 14, 2, mm) ||
        s[16] != ':' || !parse_uint(s, 17, 2, ss))
        return std::nullopt;
    if (mon < 1 || mon > 12 || day < 1 || day > 31 || hh > 23 || mm > 59 || ss > 60)
        return std::nullopt;

    std::size_t pos = 19;
    std::int64_t frac_ns = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        int digits = 0;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9' && digits < 9) {
            frac_ns = frac_ns * 10 + (s[pos] - '0');
            ++pos;
            ++digits;
        }
        if (digits == 0) return std::nullopt;
        // skip precision beyond ns
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
        for (; digits < 9; ++digits) frac_ns *= 10;
    }

    std::int64_t offset_s = 0;
    if (pos < s.size()) {
        if (s[pos] == 'Z') {
            ++pos;
        } else if (s[pos] == '+' || s[pos] == '-') {
            const int sign = s[pos] == '+' ? 1 : -1;
            unsigned oh, om;
            if (!parse_uint(s, pos + 1, 2, oh)) return std::nullopt;
            std::size_t opos = pos + 3;
            if (opos < s.size() && s[opos] == ':') ++opos;
            if (!parse_uint(s, opos, 2, om)) return std::nullopt;
            offset_s = sign * (static_cast<std::int64_t>(oh) * 3600 + om * 60);
            pos = opos + 2;
        }
    }
    if (pos != s.size()) return std::nullopt;

    const std::int64_t days = days_from_civil(year, mon, day);
    const std::int64_t secs =
        days * 86400 + hh * 3600 + mm * 60 + ss - offset_s;
    return secs * kNanosPerSecond + frac_ns;
}

std::optional<Timestamp> parse_epoch(std::string_view s) {
    const std::string buf(s);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(buf.c_str(), &end);
    if (end != buf.c_str() + buf.size() || errno != 0 || !std::isfinite(v))
        return std::nullopt;
    const double mag = std::fabs(v);
    double scale;  // to nanoseconds
    if (mag < 1e11)
        scale = 1e9;  // seconds
    else if (mag < 1e14)
        scale = 1e6;  // milliseconds
    else if (mag < 1e17)
        scale = 1e3;  // microseconds
    else
        scale = 1.0;  // nanoseconds
    return static_cast<Timestamp>(std::llround(v * scale));
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
        text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' ||
                             text.back() == '\r'))
        text.remove_suffix(1);
    if (text.empty()) return std::nullopt;
    if (text.size() >= 11 && text[4] == '-') return parse_iso8601(text);
    return parse_epoch(text);
}

std::string format_timestamp(Timestamp t) {
    std::int64_t secs = t / kNanosPerSecond;
    std::int64_t frac = t % kNanosPerSecond;
    if (frac < 0) {
        frac += kNanosPerSecond;
        secs -= 1;
    }
    std::int64_t days = secs / 86400;
    std::int64_t sod = secs % 86400;
    if (sod < 0) {
        sod += 86400;
        days -= 1;
    }
    std::int64_t y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lld.%09lldZ",
                  static_cast<long long>(y), m, d,
                  static_cast<long long>(sod / 3600),
                  static_cast<long long>((sod / 60) % 60),
                  static_cast<long long>(sod % 60),
                  static_cast<long long>(frac));
    return buf;
}

std::string format_value(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::optional<double> parse_value(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
        text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' ||
                             text.back() == '\r'))
        text.remove_suffix(1);
    if (text.empty() || text == "nan" || text == "NaN" || text == "NAN")
        return std::numeric_limits<double>::quiet_NaN();
    double v = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        return std::nullopt;
    return v;
}

}  // namespace dynamo
