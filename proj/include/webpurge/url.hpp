#ifndef WEBPURGE_URL_HPP
#define WEBPURGE_URL_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "webpurge/util.hpp"

namespace webpurge {

// Minimal URL handling: enough of RFC 3986 for provenance URLs, redirect
// targets and scraped hrefs. No IDN, no userinfo round-tripping.
struct Url {
    std::string scheme;   // lowercase
    std::string host;     // lowercase
    std::string port;     // empty when default
    std::string path;     // begins with '/' when authority present
    std::string query;    // without '?', may be empty
    std::string fragment; // without '#', may be empty

    std::string origin() const {
        std::string o = scheme + "://" + host;
        if (!port.empty()) o += ":" + port;
        return o;
    }

    std::string path_and_query() const {
        std::string p = path.empty() ? "/" : path;
        if (!query.empty()) p += "?" + query;
        return p;
    }

    std::string str() const {
        std::string s = origin() + (path.empty() ? "" : path);
        if (!query.empty()) s += "?" + query;
        if (!fragment.empty()) s += "#" + fragment;
        return s;
    }

    // Final non-empty path segment, or "" for "/" and empty paths.
    std::string last_segment() const {
        if (path.empty()) return "";
        size_t end = path.size();
        while (end > 0 && path[end - 1] == '/') end--;
        size_t begin = path.rfind('/', end == 0 ? 0 : end - 1);
        if (begin == std::string::npos) return path.substr(0, end);
        return path.substr(begin + 1, end - begin - 1);
    }
};

inline std::optional<Url> parse_url(std::string_view input) {
    std::string s = trim(input);
    size_t sp = s.find("://");
    if (sp == std::string::npos || sp == 0) return std::nullopt;
    Url u;
    u.scheme = to_lower(s.substr(0, sp));
    for (char c : u.scheme)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.')
            return std::nullopt;
    size_t rest = sp + 3;
    size_t auth_end = s.find_first_of("/?#", rest);
    std::string authority = s.substr(rest, auth_end == std::string::npos ? std::string::npos
                                                                         : auth_end - rest);
    size_t at = authority.rfind('@');
    if (at != std::string::npos) authority = authority.substr(at + 1);
    size_t colon = authority.rfind(':');
    if (colon != std::string::npos && authority.find(']') == std::string::npos) {
        u.host = to_lower(authority.substr(0, colon));
        u.port = authority.substr(colon + 1);
    } else {
        u.host = to_lower(authority);
    }
    if (auth_end == std::string::npos) {
        u.path = u.host.empty() ? "" : "/";
        return u;
    }
    std::string tail = s.substr(auth_end);
    size_t frag = tail.find('#');
    if (frag != std::string::npos) {
        u.fragment = tail.substr(frag + 1);
        tail = tail.substr(0, frag);
    }
    size_t q = tail.find('?');
    if (q != std::string::npos) {
        u.query = tail.substr(q + 1);
        tail = tail.substr(0, q);
    }
    u.path = tail.empty() ? "/" : tail;
    return u;
}

inline bool is_http_url(const Url& u) {
    return (u.scheme == "http" || u.scheme == "https") && !u.host.empty();
}

// Windows drive-letter references ("C:\..." or "C:/...") show up verbatim
// in provenance fields; they are not URLs but must be recognized.
inline bool is_drive_letter_path(std::string_view s) {
    return s.size() >= 3 && std::isalpha(static_cast<unsigned char>(s[0])) &&
           s[1] == ':' && (s[2] == '\\' || s[2] == '/');
}

inline bool is_local_reference(std::string_view s) {
    return starts_with_ci(s, "file://") || is_drive_letter_path(s);
}

// RFC 3986 5.2.4 remove_dot_segments.
inline std::string remove_dot_segments(std::string_view path) {
    std::string in(path), out;
    while (!in.empty()) {
        if (in.rfind("../", 0) == 0) in.erase(0, 3);
        else if (in.rfind("./", 0) == 0) in.erase(0, 2);
        else if (in.rfind("/./", 0) == 0) in.replace(0, 3, "/");
        else if (in == "/.") in = "/";
        else if (in.rfind("/../", 0) == 0 || in == "/..") {
            in.replace(0, in == "/.." ? 3 : 4, "/");
            size_t slash = out.rfind('/');
            out.erase(slash == std::string::npos ? 0 : slash);
        } else if (in == "." || in == "..") in.clear();
        else {
            size_t next = in.find('/', 1);
            out += in.substr(0, next);
            in.erase(0, next == std::string::npos ? in.size() : next);
        }
    }
    return out;
}

// Resolve `reference` against `base` per RFC 3986 5.2. Returns nullopt when
// the result is not an absolute URL (e.g. unparsable base).
inline std::optional<Url> resolve_reference(const Url& base, std::string_view reference) {
    std::string ref = trim(reference);
    if (ref.empty()) return base;
    // A colon ahead of any '/', '?' or '#' marks a scheme-qualified
    // reference (mailto:, javascript:, https:), never a relative path.
    size_t colon = ref.find(':');
    if (colon != std::string::npos && colon < ref.find_first_of("/?#")) {
        auto abs = parse_url(ref);
        if (!abs) return std::nullopt;
        abs->path = remove_dot_segments(abs->path);
        return abs;
    }
    // Scheme-less forms require an http(s)-ish base.
    if (base.scheme.empty() || base.host.empty()) return std::nullopt;
    Url out = base;
    out.fragment.clear();
    size_t frag = ref.find('#');
    if (frag != std::string::npos) {
        out.fragment = ref.substr(frag + 1);
        ref = ref.substr(0, frag);
    }
    if (ref.empty()) return out;  // fragment-only
    if (ref.rfind("//", 0) == 0) {
        auto net = parse_url(base.scheme + ":" + ref);
        if (!net) return std::nullopt;
        net->fragment = out.fragment;
        net->path = remove_dot_segments(net->path);
        return net;
    }
    size_t q = ref.find('?');
    std::string refpath = std::string(ref.substr(0, q == std::string::npos ? ref.size() : q));
    out.query = q == std::string::npos ? "" : std::string(ref.substr(q + 1));
    if (refpath.empty()) {
        out.path = base.path;
        if (q == std::string::npos) out.query = base.query;
    } else if (refpath[0] == '/') {
        out.path = remove_dot_segments(refpath);
    } else {
        // Merge with base path: everything up to the last '/'.
        std::string dir = base.path;
        size_t slash = dir.rfind('/');
        dir = slash == std::string::npos ? "/" : dir.substr(0, slash + 1);
        out.path = remove_dot_segments(dir + refpath);
    }
    if (out.path.empty()) out.path = "/";
    return out;
}

inline std::string percent_decode(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); i++) {
        if (s[i] == '%' && i + 2 < s.size() &&
            std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
            std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
            auto nib = [](char c) {
                return c <= '9' ? c - '0' : (std::tolower(c) - 'a' + 10);
            };
            out.push_back(static_cast<char>(nib(s[i + 1]) * 16 + nib(s[i + 2])));
            i += 2;
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

// Domain-list membership: exact host or any-subdomain match.
inline bool host_matches_domain(std::string_view host, std::string_view domain) {
    if (host.size() < domain.size()) return false;
    if (iequals(host, domain)) return true;
    return host.size() > domain.size() &&
           host[host.size() - domain.size() - 1] == '.' &&
           iequals(host.substr(host.size() - domain.size()), domain);
}

inline bool host_in_list(std::string_view host, const std::vector<std::string>& domains) {
    for (const auto& d : domains)
        if (host_matches_domain(host, d)) return true;
    return false;
}

}  // namespace webpurge

#endif  // WEBPURGE_URL_HPP
