#ifndef WEBPURGE_WEBCHECK_HPP
#define WEBPURGE_WEBCHECK_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "webpurge/config.hpp"
#include "webpurge/fetch.hpp"
#include "webpurge/hash.hpp"
#include "webpurge/html.hpp"
#include "webpurge/origin.hpp"
#include "webpurge/recipe.hpp"
#include "webpurge/url.hpp"

namespace webpurge {

enum class RdStatus { NotRedownloadable, PublicRd, RdWithAuth };

inline const char* to_string(RdStatus s) {
    switch (s) {
        case RdStatus::PublicRd: return "Public Rd";
        case RdStatus::RdWithAuth: return "Rd w Auth";
        default: return "Not Rd";
    }
}

enum class ChannelMode { direct, indirect, presumed };

inline const char* to_string(ChannelMode m) {
    switch (m) {
        case ChannelMode::indirect: return "indirect";
        case ChannelMode::presumed: return "presumed";
        default: return "direct";
    }
}

struct ChannelResult {
    RdStatus status = RdStatus::NotRedownloadable;
    std::string url_used;
    ChannelMode mode = ChannelMode::direct;
    std::string reason;
    std::uint64_t bytes_read = 0;  // body bytes this check pulled off the wire
};

struct AvailabilityOutcome {
    std::optional<ChannelResult> via_hu;
    std::optional<ChannelResult> via_ru;
    RdStatus best = RdStatus::NotRedownloadable;
    std::string reason;  // explains best when no channel was evaluated
};

// Pages bigger than this are not worth scraping; also bounds memory.
inline constexpr size_t kPageCaptureCap = 4 * 1024 * 1024;
inline constexpr size_t kMaxCandidateProbes = 10;

namespace detail {

struct CapturedBody {
    std::string data;  // first min(body, kPageCaptureCap) bytes
    bool is_html = false;
};

inline bool looks_html(const FetchResult& r) {
    return to_lower(r.header("content-type")).find("html") != std::string::npos;
}

inline bool login_host_redirect(const FetchResult& r, const Url& requested,
                                const CategoryLists& lists) {
    if (r.redirects == 0) return false;
    auto fin = parse_url(r.final_url);
    if (!fin || fin->host == requested.host) return false;
    for (const auto& p : lists.login_host_prefixes)
        if (starts_with_ci(fin->host, p)) return true;
    return false;
}

}  // namespace detail

// Fetch `url` and decide whether it serves the recipe's exact bytes.
// All failures map to a ChannelResult; nothing throws.  When `page` is given
// and the response was an HTML document, its (possibly truncated) text is
// stored there so indirect checking can reuse it without a second fetch.
inline ChannelResult check_direct(const std::string& url, const Recipe& recipe,
                                  Fetcher& fetcher, const CategoryLists& lists,
                                  detail::CapturedBody* page = nullptr) {
    ChannelResult out;
    out.url_used = url;
    out.mode = ChannelMode::direct;

    auto parsed = parse_url(url);
    if (!parsed || (parsed->scheme != "http" && parsed->scheme != "https")) {
        out.reason = "non-web scheme";
        return out;
    }

    if (!Hasher::supported(recipe.hash_algo)) {
        out.reason = "unsupported hash algorithm " + recipe.hash_algo;
        return out;
    }
    Hasher full(recipe.hash_algo);
    // Fail-fast only makes sense when the recorded partial hash covers a
    // strict prefix of the file.
    bool armed = recipe.partial_hash.has_value() &&
                 recipe.size_bytes >= recipe.partial_len && recipe.partial_len > 0;
    bool partial_mismatch = false;
    std::uint64_t consumed = 0;
    std::string captured;

    auto sink = [&](const char* data, size_t len) -> bool {
        // Keep a bounded prefix in case this turns out to be a page.
        if (captured.size() < kPageCaptureCap)
            captured.append(data, std::min(len, kPageCaptureCap - captured.size()));

        if (armed && consumed < recipe.partial_len &&
            consumed + len >= recipe.partial_len) {
            size_t head = static_cast<size_t>(recipe.partial_len - consumed);
            full.update(data, head);
            if (full.hex_digest() != *recipe.partial_hash) {
                partial_mismatch = true;
                consumed += head;
                return false;
            }
            full.update(data + head, len - head);
        } else {
            full.update(data, len);
        }
        consumed += len;
        // Body already longer than the recorded file: the hash can no longer
        // match.  Let HTML keep streaming up to the capture cap so links
        // survive for the indirect pass, then cut the cord.
        if (consumed > recipe.size_bytes && consumed >= kPageCaptureCap) {
            partial_mismatch = true;
            return false;
        }
        return true;
    };

    FetchResult res = fetcher.fetch(url, sink);
    out.bytes_read = consumed;

    if (!res.ok && !res.sink_aborted) {
        out.reason = res.error.empty() ? "connection failure" : res.error;
        return out;
    }
    if (detail::login_host_redirect(res, *parsed, lists)) {
        auto fin = parse_url(res.final_url);
        out.status = RdStatus::RdWithAuth;
        out.reason = "redirected to login host " + (fin ? fin->host : res.final_url);
        return out;
    }
    if (res.status == 401 || res.status == 403) {
        out.status = RdStatus::RdWithAuth;
        out.reason = "HTTP " + std::to_string(res.status);
        return out;
    }
    if (res.status != 200) {
        out.reason = "HTTP " + std::to_string(res.status);
        return out;
    }

    std::string note;
    if (res.has_header("content-length")) {
        std::uint64_t cl = 0;
        try { cl = std::stoull(res.header("content-length")); } catch (...) { cl = 0; }
        if (cl != recipe.size_bytes)
            note = " (content-length " + std::to_string(cl) + " differs from recorded size " +
                   std::to_string(recipe.size_bytes) + ")";
    }
    if (page && detail::looks_html(res)) {
        page->data = std::move(captured);
        page->is_html = true;
    }
    if (partial_mismatch || res.sink_aborted) {
        out.reason = "content mismatch (fail-fast)" + note;
        return out;
    }
    if (full.hex_digest() == recipe.hash_full) {
        out.status = RdStatus::PublicRd;
        out.reason = "hash verified" + note;
        return out;
    }
    out.reason = "content mismatch" + note;
    return out;
}

namespace detail {

// Candidate order: exact name match, then same extension, then the rest;
// document order preserved within each tier.
inline std::vector<std::string> rank_candidates(const std::vector<std::string>& links,
                                                const std::string& file_name) {
    std::string ext = file_extension(file_name);
    std::vector<std::string> exact, same_ext, rest;
    for (const auto& l : links) {
        auto u = parse_url(l);
        std::string seg = u ? u->last_segment() : std::string();
        std::string decoded = percent_decode(seg);
        if (seg == file_name || decoded == file_name) exact.push_back(l);
        else if (!ext.empty() && file_extension(decoded) == ext) same_ext.push_back(l);
        else rest.push_back(l);
    }
    std::vector<std::string> out;
    out.reserve(links.size());
    for (auto& v : {exact, same_ext, rest})
        out.insert(out.end(), v.begin(), v.end());
    if (out.size() > kMaxCandidateProbes) out.resize(kMaxCandidateProbes);
    return out;
}

}  // namespace detail

// Scrape `page_html` (fetched from page_url) and probe its links for the
// recipe's bytes.  First verified hit wins; an auth wall seen along the way
// is remembered as the fallback classification.
inline ChannelResult check_indirect_page(const std::string& page_url,
                                         const std::string& page_html,
                                         const Recipe& recipe, Fetcher& fetcher,
                                         const CategoryLists& lists) {
    ChannelResult out;
    out.url_used = page_url;
    out.mode = ChannelMode::indirect;
    out.reason = "no link served matching content";

    auto links = scrape_links(page_html, page_url);
    auto ranked = detail::rank_candidates(links, recipe.file_name);
    std::optional<ChannelResult> auth_fallback;
    for (const auto& cand : ranked) {
        ChannelResult probe = check_direct(cand, recipe, fetcher, lists);
        out.bytes_read += probe.bytes_read;
        if (probe.status == RdStatus::PublicRd) {
            probe.mode = ChannelMode::indirect;
            probe.bytes_read = out.bytes_read;
            return probe;
        }
        if (probe.status == RdStatus::RdWithAuth && !auth_fallback)
            auth_fallback = probe;
    }
    if (auth_fallback) {
        auth_fallback->mode = ChannelMode::indirect;
        auth_fallback->bytes_read = out.bytes_read;
        return *auth_fallback;
    }
    if (ranked.empty()) out.reason = "no candidate links on page";
    return out;
}

// Convenience wrapper that fetches the page itself first.
inline ChannelResult check_indirect(const std::string& page_url, const Recipe& recipe,
                                    Fetcher& fetcher, const CategoryLists& lists) {
    std::string body;
    std::uint64_t page_bytes = 0;
    auto sink = [&](const char* data, size_t len) {
        page_bytes += len;
        if (body.size() < kPageCaptureCap)
            body.append(data, std::min(len, kPageCaptureCap - body.size()));
        return body.size() < kPageCaptureCap;
    };
    FetchResult res = fetcher.fetch(page_url, sink);
    ChannelResult out;
    out.url_used = page_url;
    out.mode = ChannelMode::indirect;
    out.bytes_read = page_bytes;
    if (!res.ok && !res.sink_aborted) {
        out.reason = res.error.empty() ? "connection failure" : res.error;
        return out;
    }
    if (res.status != 200) {
        out.reason = "HTTP " + std::to_string(res.status);
        return out;
    }
    ChannelResult probe = check_indirect_page(page_url, body, recipe, fetcher, lists);
    probe.bytes_read += page_bytes;
    return probe;
}

namespace detail {

inline bool presumed_auth_host(const std::string& host, const CategoryLists& lists) {
    return host_in_list(host, lists.webmail) ||
           host_in_list(host, lists.cloud_collaboration) ||
           host_in_list(host, lists.big_tech_csp);
}

// One channel end to end: presumption rules, then direct, then — if the
// direct attempt surfaced an HTML document instead of the file — indirect.
inline ChannelResult check_channel(const std::string& url, const Recipe& recipe,
                                   Fetcher& fetcher, const Config& cfg) {
    ChannelResult out;
    out.url_used = url;

    if (is_local_reference(url)) {
        out.mode = ChannelMode::presumed;
        if (cfg.presume_local) {
            out.status = RdStatus::RdWithAuth;
            out.reason = "local reference (presumed reachable with access)";
        } else {
            out.reason = "local reference";
        }
        return out;
    }
    auto parsed = parse_url(url);
    if (parsed && (parsed->scheme == "http" || parsed->scheme == "https") &&
        cfg.presume_auth && presumed_auth_host(parsed->host, cfg.categories)) {
        out.mode = ChannelMode::presumed;
        out.status = RdStatus::RdWithAuth;
        out.reason = "presumed (requires account at " + parsed->host + ")";
        return out;
    }

    CapturedBody page;
    ChannelResult direct = check_direct(url, recipe, fetcher, cfg.categories, &page);
    if (direct.status != RdStatus::NotRedownloadable || !page.is_html)
        return direct;

    ChannelResult indirect = check_indirect_page(url, page.data, recipe, fetcher,
                                                 cfg.categories);
    indirect.bytes_read += direct.bytes_read;
    if (indirect.status == RdStatus::NotRedownloadable) {
        // keep the page-probing trail but surface both facts
        indirect.reason = direct.reason + "; " + indirect.reason;
    }
    return indirect;
}

inline RdStatus combine_best(const std::optional<ChannelResult>& a,
                             const std::optional<ChannelResult>& b) {
    auto rank = [](const std::optional<ChannelResult>& c) {
        if (!c) return 0;
        switch (c->status) {
            case RdStatus::PublicRd: return 2;
            case RdStatus::RdWithAuth: return 1;
            default: return 0;
        }
    };
    int r = std::max(rank(a), rank(b));
    return r == 2 ? RdStatus::PublicRd : r == 1 ? RdStatus::RdWithAuth
                                                : RdStatus::NotRedownloadable;
}

}  // namespace detail

// HU first (the better link), then RU; stop as soon as something is publicly
// verified.  `via_ru` stays unevaluated after an HU hit.
inline AvailabilityOutcome check_availability(const Recipe& recipe, Fetcher& fetcher,
                                              const Config& cfg) {
    AvailabilityOutcome out;
    if (!recipe.host_url && !recipe.referrer_url) {
        out.reason = "links not recorded";
        return out;
    }
    if (recipe.host_url) {
        out.via_hu = detail::check_channel(*recipe.host_url, recipe, fetcher, cfg);
        if (out.via_hu->status == RdStatus::PublicRd) {
            out.best = RdStatus::PublicRd;
            return out;
        }
    }
    if (recipe.referrer_url)
        out.via_ru = detail::check_channel(*recipe.referrer_url, recipe, fetcher, cfg);
    out.best = detail::combine_best(out.via_hu, out.via_ru);
    return out;
}

// Evaluates both channels even after a public hit; used where per-channel
// outcomes are the point (reports, maintenance detail).
inline AvailabilityOutcome check_availability_full(const Recipe& recipe, Fetcher& fetcher,
                                                   const Config& cfg) {
    AvailabilityOutcome out;
    if (!recipe.host_url && !recipe.referrer_url) {
        out.reason = "links not recorded";
        return out;
    }
    if (recipe.host_url)
        out.via_hu = detail::check_channel(*recipe.host_url, recipe, fetcher, cfg);
    if (recipe.referrer_url)
        out.via_ru = detail::check_channel(*recipe.referrer_url, recipe, fetcher, cfg);
    out.best = detail::combine_best(out.via_hu, out.via_ru);
    return out;
}

}  // namespace webpurge

#endif  // WEBPURGE_WEBCHECK_HPP
