#ifndef WEBPURGE_UTIL_HPP
#define WEBPURGE_UTIL_HPP

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace webpurge {

using UnixTime = std::int64_t;  // seconds since epoch, UTC

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) b++;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) e--;
    return std::string(s.substr(b, e - b));
}

inline bool starts_with_ci(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (size_t i = 0; i < prefix.size(); i++)
        if (std::tolower(static_cast<unsigned char>(s[i])) !=
            std::tolower(static_cast<unsigned char>(prefix[i])))
            return false;
    return true;
}

inline bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && starts_with_ci(a, b);
}

// ---- hex ----

inline std::string to_hex(const unsigned char* data, size_t len) {
    static const char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (size_t i = 0; i < len; i++) {
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 0xf]);
    }
    return out;
}

inline bool is_hex_string(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isxdigit(c) && !std::isupper(c);
    });
}

// ---- RFC 3339 timestamps (second precision, UTC) ----

inline std::string format_rfc3339(UnixTime t) {
    std::time_t tt = static_cast<std::time_t>(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[80];  // years outside 4 digits still fit
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ",
                  tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                  tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

inline std::optional<UnixTime> parse_rfc3339(std::string_view s) {
    std::tm tm{};
    int y, mo, d, h, mi, se;
    char tz;
    std::string str(s);
    if (std::sscanf(str.c_str(), "%d-%d-%dT%d:%d:%d%c", &y, &mo, &d, &h, &mi, &se, &tz) != 7)
        return std::nullopt;
    if (tz != 'Z' && tz != 'z' && tz != '+' && tz != '-') return std::nullopt;
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = se;
    std::time_t t = timegm(&tm);
    if (t == -1) return std::nullopt;
    // Offset forms (+hh:mm) are accepted and folded back into UTC.
    if (tz == '+' || tz == '-') {
        int oh = 0, om = 0;
        size_t pos = str.find(tz, 19);
        if (pos == std::string::npos ||
            std::sscanf(str.c_str() + pos + 1, "%d:%d", &oh, &om) < 1)
            return std::nullopt;
        int off = oh * 3600 + om * 60;
        t += (tz == '+') ? -off : off;
    }
    return static_cast<UnixTime>(t);
}

inline UnixTime now_unix() {
    return static_cast<UnixTime>(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch()).count());
}

// ---- byte quantities ----

// Display uses decimal units to match how drive vendors and the reports
// quote sizes: 1 kB = 1e3, 1 MB = 1e6, 1 GB = 1e9, 1 TB = 1e12.
inline std::string format_bytes_decimal(std::uint64_t bytes) {
    char buf[32];
    double b = static_cast<double>(bytes);
    if (bytes >= 1000000000000ULL)
        std::snprintf(buf, sizeof(buf), "%.2f TB", b / 1e12);
    else if (bytes >= 1000000000ULL)
        std::snprintf(buf, sizeof(buf), "%.2f GB", b / 1e9);
    else if (bytes >= 1000000ULL)
        std::snprintf(buf, sizeof(buf), "%.1f MB", b / 1e6);
    else if (bytes >= 1000ULL)
        std::snprintf(buf, sizeof(buf), "%.1f kB", b / 1e3);
    else
        std::snprintf(buf, sizeof(buf), "%llu B", static_cast<unsigned long long>(bytes));
    return buf;
}

// Accepts "12345", "10GB", "500MB", "1.5GiB" etc. Decimal suffixes scale by
// 1000, binary (KiB/MiB/GiB/TiB) by 1024. Whitespace between number and
// suffix is tolerated.
inline std::optional<std::uint64_t> parse_bytes(std::string_view input) {
    std::string s = trim(input);
    if (s.empty()) return std::nullopt;
    size_t i = 0;
    while (i < s.size() &&
           (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.'))
        i++;
    if (i == 0) return std::nullopt;
    double value;
    try {
        value = std::stod(s.substr(0, i));
    } catch (...) {
        return std::nullopt;
    }
    std::string suffix = to_lower(trim(s.substr(i)));
    double mult;
    if (suffix.empty() || suffix == "b") mult = 1;
    else if (suffix == "kb" || suffix == "k") mult = 1e3;
    else if (suffix == "mb" || suffix == "m") mult = 1e6;
    else if (suffix == "gb" || suffix == "g") mult = 1e9;
    else if (suffix == "tb" || suffix == "t") mult = 1e12;
    else if (suffix == "kib") mult = 1024.0;
    else if (suffix == "mib") mult = 1024.0 * 1024;
    else if (suffix == "gib") mult = 1024.0 * 1024 * 1024;
    else if (suffix == "tib") mult = 1024.0 * 1024 * 1024 * 1024;
    else return std::nullopt;
    double bytes = value * mult;
    if (bytes < 0 || bytes > 1.8e19) return std::nullopt;
    return static_cast<std::uint64_t>(bytes + 0.5);
}

// ---- basic stats used by the report tables ----

struct Stats {
    double min = 0, mean = 0, median = 0, max = 0;
    std::size_t count = 0;
};

inline Stats compute_stats(std::vector<double> values) {
    Stats st;
    st.count = values.size();
    if (values.empty()) return st;
    std::sort(values.begin(), values.end());
    st.min = values.front();
    st.max = values.back();
    double sum = 0;
    for (double v : values) sum += v;
    st.mean = sum / static_cast<double>(values.size());
    size_t n = values.size();
    st.median = (n % 2 == 1) ? values[n / 2]
                             : (values[n / 2 - 1] + values[n / 2]) / 2.0;
    return st;
}

// Sample standard deviation (n-1 denominator); 0 for fewer than two values.
inline double sample_stddev(const std::vector<double>& values) {
    if (values.size() < 2) return 0.0;
    double sum = 0;
    for (double v : values) sum += v;
    double mean = sum / static_cast<double>(values.size());
    double ss = 0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace webpurge

#endif  // WEBPURGE_UTIL_HPP
