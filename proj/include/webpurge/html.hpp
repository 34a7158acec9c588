#ifndef WEBPURGE_HTML_HPP
#define WEBPURGE_HTML_HPP

#include <cctype>
#include <cstring>
#include <string>
#include <unordered_set>
#include <vector>

#include "webpurge/url.hpp"
#include "webpurge/util.hpp"

namespace webpurge {

namespace detail {

// The handful of entities that actually show up inside href values.
inline std::string decode_entities(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out += s[i++];
            continue;
        }
        size_t semi = s.find(';', i);
        if (semi == std::string::npos || semi - i > 10) {
            out += s[i++];
            continue;
        }
        std::string ent = s.substr(i + 1, semi - i - 1);
        if (ent == "amp") out += '&';
        else if (ent == "lt") out += '<';
        else if (ent == "gt") out += '>';
        else if (ent == "quot") out += '"';
        else if (ent == "apos") out += '\'';
        else if (ent.size() > 1 && ent[0] == '#') {
            long code = 0;
            try {
                code = (ent[1] == 'x' || ent[1] == 'X') ? std::stol(ent.substr(2), nullptr, 16)
                                                        : std::stol(ent.substr(1));
            } catch (...) { code = -1; }
            if (code >= 0 && code < 128) out += static_cast<char>(code);
            else { out += s.substr(i, semi - i + 1); }
        } else {
            out += s.substr(i, semi - i + 1);
            i = semi + 1;
            continue;
        }
        i = semi + 1;
    }
    return out;
}

// Pulls href="..." out of the attribute region of one <a ...> tag.
inline bool find_href(const std::string& tag, std::string& href) {
    size_t i = 0;
    while (i < tag.size()) {
        while (i < tag.size() && (std::isspace(static_cast<unsigned char>(tag[i])) || tag[i] == '/'))
            i++;
        size_t name_start = i;
        while (i < tag.size() && tag[i] != '=' && tag[i] != '>' &&
               !std::isspace(static_cast<unsigned char>(tag[i])))
            i++;
        std::string name = to_lower(tag.substr(name_start, i - name_start));
        while (i < tag.size() && std::isspace(static_cast<unsigned char>(tag[i]))) i++;
        std::string value;
        if (i < tag.size() && tag[i] == '=') {
            i++;
            while (i < tag.size() && std::isspace(static_cast<unsigned char>(tag[i]))) i++;
            if (i < tag.size() && (tag[i] == '"' || tag[i] == '\'')) {
                char q = tag[i++];
                size_t end = tag.find(q, i);
                if (end == std::string::npos) end = tag.size();
                value = tag.substr(i, end - i);
                i = (end < tag.size()) ? end + 1 : end;
            } else {
                size_t start = i;
                while (i < tag.size() && !std::isspace(static_cast<unsigned char>(tag[i])) &&
                       tag[i] != '>')
                    i++;
                value = tag.substr(start, i - start);
            }
        }
        if (name == "href") {
            href = decode_entities(trim(value));
            return true;
        }
        if (name.empty()) break;
    }
    return false;
}

}  // namespace detail

// Anchor hrefs in document order, resolved against base_url, http(s) only,
// deduplicated keeping the first occurrence.  Tolerant of broken markup:
// anything that doesn't look like an <a> tag is skipped, never fatal.
inline std::vector<std::string> scrape_links(const std::string& html,
                                             const std::string& base_url) {
    std::vector<std::string> out;
    auto base = parse_url(base_url);
    if (!base) return out;

    std::unordered_set<std::string> seen;
    size_t i = 0;
    while (i < html.size()) {
        size_t lt = html.find('<', i);
        if (lt == std::string::npos) break;
        // comments can legally contain "<a", skip them whole
        if (html.compare(lt, 4, "<!--") == 0) {
            size_t end = html.find("-->", lt + 4);
            i = (end == std::string::npos) ? html.size() : end + 3;
            continue;
        }
        // script/style bodies are not markup
        bool skipped_raw = false;
        for (const char* raw : {"script", "style"}) {
            size_t n = std::strlen(raw);
            if (lt + 1 + n <= html.size() &&
                iequals(html.substr(lt + 1, n), raw) &&
                (lt + 1 + n == html.size() || html[lt + 1 + n] == '>' ||
                 std::isspace(static_cast<unsigned char>(html[lt + 1 + n])))) {
                std::string close = "</" + std::string(raw);
                size_t end = html.size();
                for (size_t p = lt + 1; (p = html.find('<', p)) != std::string::npos; p++) {
                    if (p + close.size() <= html.size() &&
                        iequals(html.substr(p, close.size()), close)) {
                        end = html.find('>', p);
                        end = (end == std::string::npos) ? html.size() : end + 1;
                        break;
                    }
                }
                i = end;
                skipped_raw = true;
                break;
            }
        }
        if (skipped_raw) continue;
        size_t gt = html.find('>', lt + 1);
        if (gt == std::string::npos) break;
        std::string tag = html.substr(lt + 1, gt - lt - 1);
        i = gt + 1;
        if (tag.size() < 2) continue;
        if ((tag[0] != 'a' && tag[0] != 'A') ||
            !(std::isspace(static_cast<unsigned char>(tag[1])) || tag[1] == '/'))
            continue;

        std::string href;
        if (!detail::find_href(tag.substr(1), href)) continue;
        if (href.empty() || href[0] == '#') continue;  // fragment-only
        auto resolved = resolve_reference(*base, href);
        if (!resolved) continue;
        if (resolved->scheme != "http" && resolved->scheme != "https") continue;
        resolved->fragment.clear();  // fragments never reach the server
        std::string abs = resolved->str();
        if (seen.insert(abs).second) out.push_back(std::move(abs));
    }
    return out;
}

}  // namespace webpurge

#endif  // WEBPURGE_HTML_HPP
