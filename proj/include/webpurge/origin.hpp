#ifndef WEBPURGE_ORIGIN_HPP
#define WEBPURGE_ORIGIN_HPP

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#if defined(__linux__) || defined(__APPLE__)
#include <sys/xattr.h>
#endif

#include "webpurge/url.hpp"
#include "webpurge/util.hpp"

namespace webpurge {

enum class OriginChannel { ads, xattr, sidecar };

// Download provenance as recorded by the platform: the Zone.Identifier
// alternate data stream on NTFS, or freedesktop xattr keys elsewhere.
// URLs are kept verbatim; software populates these fields inconsistently
// and normalizing would destroy evidence.
struct OriginMetadata {
    std::optional<int> zone_id;
    std::optional<std::string> referrer_url;  // RU
    std::optional<std::string> host_url;      // HU
    OriginChannel channel = OriginChannel::ads;

    bool has_any_url() const { return referrer_url.has_value() || host_url.has_value(); }
    bool empty() const { return !zone_id && !referrer_url && !host_url; }
};

enum class SourceCategory {
    CloudCollaboration,
    Webmail,
    BigTechCSP,
    SmallCSP,
    ApplicationsTools,
    LocalAccess,
    DirectLink,
    LinksNotRecorded,
};

inline const char* to_string(SourceCategory c) {
    switch (c) {
        case SourceCategory::CloudCollaboration: return "Cloud Collaboration";
        case SourceCategory::Webmail: return "Webmail";
        case SourceCategory::BigTechCSP: return "Big Tech CSPs";
        case SourceCategory::SmallCSP: return "Small CSPs";
        case SourceCategory::ApplicationsTools: return "Applications/Tools";
        case SourceCategory::LocalAccess: return "Local Access";
        case SourceCategory::DirectLink: return "Direct Links";
        case SourceCategory::LinksNotRecorded: return "Links Not Recorded";
    }
    return "?";
}

// Ordered domain lists driving classify_source. The taxonomy is data, not
// an algorithm: hosts were grouped by hand in the source study, so the
// groupings must stay configurable.
struct CategoryLists {
    std::vector<std::string> webmail = {
        "outlook.office.com", "outlook.live.com", "mail.google.com",
    };
    std::vector<std::string> cloud_collaboration = {
        "sharepoint.com", "teams.microsoft.com", "teams.live.com",
    };
    std::vector<std::string> big_tech_csp = {
        "icloud.com", "drive.google.com", "docs.google.com",
        "onedrive.live.com", "1drv.ms",
    };
    std::vector<std::string> small_csp = {
        "mega.nz", "mediafire.com",
    };
    std::vector<std::string> tools = {
        "ilovepdf.com", "smallpdf.com", "online-convert.com",
    };
    // Host prefixes that mark a redirect target as a login wall.
    std::vector<std::string> login_host_prefixes = {
        "login.", "auth.", "accounts.", "signin.", "sso.",
    };
};

// ---- Zone.Identifier stream text ----

// Parses the INI-ish stream contents, e.g.
//   [ZoneTransfer]\r\nZoneId=3\r\nHostUrl=https://a.example/f.bin
// Total over arbitrary bytes: BOM, CRLF/LF, unknown keys and junk are all
// tolerated; absent when no recognized key appears.
inline std::optional<OriginMetadata> parse_zone_identifier(std::string_view text) {
    // Strip UTF-8 BOM.
    if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
        static_cast<unsigned char>(text[1]) == 0xBB &&
        static_cast<unsigned char>(text[2]) == 0xBF)
        text.remove_prefix(3);

    OriginMetadata meta;
    meta.channel = OriginChannel::ads;
    bool in_section = false;
    bool found = false;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos
                                                     ? text.size() - pos
                                                     : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        std::string l = trim(line);
        if (l.empty()) continue;
        if (l.front() == '[') {
            in_section = iequals(l, "[ZoneTransfer]");
            continue;
        }
        if (!in_section) continue;
        size_t eq = l.find('=');
        if (eq == std::string::npos) continue;
        std::string key = trim(std::string_view(l).substr(0, eq));
        std::string value = trim(std::string_view(l).substr(eq + 1));
        if (iequals(key, "ZoneId")) {
            try {
                size_t consumed = 0;
                int z = std::stoi(value, &consumed);
                if (consumed == value.size()) {
                    meta.zone_id = z;
                    found = true;
                }
            } catch (...) {
                // Malformed ZoneId: leave absent, keep parsing other keys.
            }
        } else if (iequals(key, "ReferrerUrl")) {
            if (!value.empty()) {
                meta.referrer_url = value;
                found = true;
            }
        } else if (iequals(key, "HostUrl")) {
            if (!value.empty()) {
                meta.host_url = value;
                found = true;
            }
        }
    }
    if (!found) return std::nullopt;
    return meta;
}

// Canonical stream form; parse(serialize(m)) == m.
inline std::string serialize_zone_identifier(const OriginMetadata& m) {
    std::string out = "[ZoneTransfer]\r\n";
    if (m.zone_id) out += "ZoneId=" + std::to_string(*m.zone_id) + "\r\n";
    if (m.referrer_url) out += "ReferrerUrl=" + *m.referrer_url + "\r\n";
    if (m.host_url) out += "HostUrl=" + *m.host_url + "\r\n";
    return out;
}

namespace detail {

inline std::optional<std::string> read_xattr_value(const std::filesystem::path& path,
                                                   const char* name) {
#if defined(__linux__)
    char buf[4096];
    ssize_t n = ::getxattr(path.c_str(), name, buf, sizeof(buf));
    if (n <= 0) return std::nullopt;
    return std::string(buf, static_cast<size_t>(n));
#elif defined(__APPLE__)
    char buf[4096];
    ssize_t n = ::getxattr(path.c_str(), name, buf, sizeof(buf), 0, 0);
    if (n <= 0) return std::nullopt;
    return std::string(buf, static_cast<size_t>(n));
#else
    (void)path;
    (void)name;
    return std::nullopt;
#endif
}

inline std::optional<std::string> read_file_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::string data((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return data;
}

}  // namespace detail

inline constexpr const char* kSidecarSuffix = ".zoneid";

// Reads provenance for a file. Channels, in order:
//   - sidecar "<name>.zoneid" with Zone.Identifier text (fixture mode only)
//   - NTFS alternate data stream "Zone.Identifier" (Windows)
//   - xattrs user.xdg.origin.url -> HU, user.xdg.referrer.url -> RU
// Failures are never fatal; no provenance reads as absent.
inline std::optional<OriginMetadata> read_origin(const std::filesystem::path& path,
                                                 bool fixture_mode = false) {
    std::error_code ec;
    if (fixture_mode) {
        auto sidecar = path;
        sidecar += kSidecarSuffix;
        if (std::filesystem::exists(sidecar, ec)) {
            auto text = detail::read_file_text(sidecar);
            if (text) {
                auto meta = parse_zone_identifier(*text);
                if (meta) {
                    meta->channel = OriginChannel::sidecar;
                    return meta;
                }
            }
        }
    }
#if defined(_WIN32)
    {
        auto stream = path;
        stream += ":Zone.Identifier";
        auto text = detail::read_file_text(stream);
        if (text) {
            auto meta = parse_zone_identifier(*text);
            if (meta) return meta;
        }
    }
#endif
    auto hu = detail::read_xattr_value(path, "user.xdg.origin.url");
    auto ru = detail::read_xattr_value(path, "user.xdg.referrer.url");
    if (hu || ru) {
        OriginMetadata meta;
        meta.channel = OriginChannel::xattr;
        if (hu && !trim(*hu).empty()) meta.host_url = trim(*hu);
        if (ru && !trim(*ru).empty()) meta.referrer_url = trim(*ru);
        if (meta.has_any_url()) return meta;
    }
    return std::nullopt;
}

namespace detail {

inline bool url_is_chrome_extension(std::string_view u) {
    return starts_with_ci(u, "chrome-extension://");
}

inline std::optional<std::string> url_host(const std::optional<std::string>& u) {
    if (!u) return std::nullopt;
    auto parsed = parse_url(*u);
    if (!parsed || parsed->host.empty()) return std::nullopt;
    return parsed->host;
}

// True when the URL's final path segment carries the given extension.
inline bool url_targets_extension(const std::string& u, const std::string& ext) {
    if (ext.empty()) return false;
    auto parsed = parse_url(u);
    if (!parsed) return false;
    std::string seg = to_lower(percent_decode(parsed->last_segment()));
    std::string want = "." + to_lower(ext);
    return seg.size() > want.size() &&
           seg.compare(seg.size() - want.size(), want.size(), want) == 0;
}

}  // namespace detail

// Extension of a file name, without the dot; "" when none.
inline std::string file_extension(std::string_view file_name) {
    size_t dot = file_name.rfind('.');
    if (dot == std::string_view::npos || dot == 0 || dot + 1 == file_name.size())
        return "";
    return to_lower(file_name.substr(dot + 1));
}

// Deterministic first-match cascade over HU then RU. Mirrors how the source
// URLs group in practice: platform lists first, then link shape.
inline SourceCategory classify_source(const std::optional<OriginMetadata>& origin,
                                      const std::string& extension,
                                      const CategoryLists& lists = {}) {
    if (!origin || !origin->has_any_url()) return SourceCategory::LinksNotRecorded;
    const auto& hu = origin->host_url;
    const auto& ru = origin->referrer_url;

    auto either = [&](auto&& pred) {
        if (hu && pred(*hu)) return true;
        if (ru && pred(*ru)) return true;
        return false;
    };

    if (either([](const std::string& u) { return is_local_reference(u); }))
        return SourceCategory::LocalAccess;
    if (either([](const std::string& u) { return detail::url_is_chrome_extension(u); }))
        return SourceCategory::ApplicationsTools;

    auto host_hits = [&](const std::vector<std::string>& domains) {
        return either([&](const std::string& u) {
            auto h = detail::url_host(std::optional<std::string>(u));
            return h && host_in_list(*h, domains);
        });
    };
    if (host_hits(lists.webmail)) return SourceCategory::Webmail;
    if (host_hits(lists.cloud_collaboration)) return SourceCategory::CloudCollaboration;
    if (host_hits(lists.big_tech_csp)) return SourceCategory::BigTechCSP;
    if (host_hits(lists.small_csp)) return SourceCategory::SmallCSP;
    if (host_hits(lists.tools)) return SourceCategory::ApplicationsTools;

    if (hu && detail::url_targets_extension(*hu, extension))
        return SourceCategory::DirectLink;
    // HU plus a page-like RU is the classic "download link + page" pair.
    if (hu && ru) {
        auto ruu = parse_url(*ru);
        if (ruu && is_http_url(*ruu)) return SourceCategory::DirectLink;
    }
    if (hu) return SourceCategory::SmallCSP;
    return SourceCategory::ApplicationsTools;
}

// Category of one URL considered alone, used for per-channel evaluation
// (each provenance field is judged on its own merits there).
inline SourceCategory classify_url(const std::string& url, const std::string& extension,
                                   const CategoryLists& lists = {}) {
    OriginMetadata solo;
    solo.host_url = url;
    return classify_source(solo, extension, lists);
}

}  // namespace webpurge

#endif  // WEBPURGE_ORIGIN_HPP
