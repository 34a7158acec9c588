#ifndef WEBPURGE_FETCH_HPP
#define WEBPURGE_FETCH_HPP

#include <cstddef>
#include <functional>
#include <map>
#include <string>

#include <httplib.h>

#include "webpurge/url.hpp"
#include "webpurge/util.hpp"

namespace webpurge {

inline constexpr int kMaxRedirects = 10;

// Receives body chunks as they arrive; return false to abort the transfer.
using BodySink = std::function<bool(const char* data, size_t len)>;

struct FetchResult {
    bool ok = false;          // transport worked and we got an HTTP status
    std::string error;        // transport failure description when !ok
    int status = 0;
    std::string final_url;    // logical URL after following redirects
    std::map<std::string, std::string> headers;  // final response, keys lowercased
    bool sink_aborted = false;  // sink asked to stop; body is incomplete
    int redirects = 0;

    bool has_header(const std::string& name) const { return headers.count(to_lower(name)) > 0; }
    std::string header(const std::string& name) const {
        auto it = headers.find(to_lower(name));
        return it == headers.end() ? std::string() : it->second;
    }
};

// Injectable so webcheck tests run against a scripted loopback server.
class Fetcher {
  public:
    virtual ~Fetcher() = default;
    // GET `url`, streaming the body into `sink`.  Never throws; failures are
    // reported in the result.  The body is consumable exactly once.
    virtual FetchResult fetch(const std::string& url, const BodySink& sink) = 0;
};

class HttpFetcher : public Fetcher {
  public:
    // Maps a logical URL to the transport URL actually dialed.  Tests point
    // fixture hosts at a loopback mock while redirect/auth logic still sees
    // the logical URL.  Identity by default.
    using UrlRewriter = std::function<std::string(const std::string&)>;

    explicit HttpFetcher(int timeout_secs = 30, std::string user_agent = "webpurge/1.0")
        : timeout_secs_(timeout_secs), user_agent_(std::move(user_agent)) {}

    void set_url_rewriter(UrlRewriter rw) { rewrite_ = std::move(rw); }

    FetchResult fetch(const std::string& url, const BodySink& sink) override {
        FetchResult out;
        std::string current = url;
        for (int hop = 0; hop <= kMaxRedirects; ++hop) {
            auto logical = parse_url(current);
            if (!logical || (logical->scheme != "http" && logical->scheme != "https")) {
                out.error = "unsupported URL: " + current;
                out.final_url = current;
                return out;
            }
            std::string transport = rewrite_ ? rewrite_(current) : current;
            auto taddr = parse_url(transport);
            if (!taddr) {
                out.error = "unusable transport address for " + current;
                out.final_url = current;
                return out;
            }

            httplib::Client cli(taddr->origin());
            cli.set_connection_timeout(timeout_secs_, 0);
            cli.set_read_timeout(timeout_secs_, 0);
            cli.set_write_timeout(timeout_secs_, 0);
            cli.set_follow_location(false);  // redirects handled here
            cli.enable_server_certificate_verification(false);

            httplib::Headers hdrs = {{"User-Agent", user_agent_},
                                     {"Host", logical->host}};
            std::string location;
            int status = 0;
            bool redirect = false;
            bool aborted = false;
            auto res = cli.Get(
                taddr->path_and_query(), hdrs,
                [&](const httplib::Response& r) {
                    status = r.status;
                    redirect = (r.status >= 300 && r.status < 400 && r.has_header("Location"));
                    if (redirect) {
                        location = r.get_header_value("Location");
                    } else {
                        out.headers.clear();
                        for (const auto& [k, v] : r.headers) out.headers[to_lower(k)] = v;
                    }
                    return true;
                },
                [&](const char* data, size_t len) {
                    if (redirect) return true;  // drain redirect bodies
                    if (!sink || sink(data, len)) return true;
                    aborted = true;
                    return false;
                });

            if (aborted) {
                // httplib reports a cancelled transfer as an error; it isn't one.
                out.ok = true;
                out.status = status;
                out.final_url = current;
                out.sink_aborted = true;
                return out;
            }
            if (!res) {
                out.error = httplib::to_string(res.error());
                out.final_url = current;
                return out;
            }
            if (redirect && !location.empty()) {
                auto next = resolve_reference(*logical, location);
                if (!next) {
                    out.error = "unresolvable redirect target: " + location;
                    out.final_url = current;
                    return out;
                }
                current = next->str();
                out.redirects = hop + 1;
                continue;
            }
            out.ok = true;
            out.status = status;
            out.final_url = current;
            return out;
        }
        out.error = "redirect limit exceeded";
        out.final_url = current;
        return out;
    }

  private:
    int timeout_secs_;
    std::string user_agent_;
    UrlRewriter rewrite_;
};

}  // namespace webpurge

#endif  // WEBPURGE_FETCH_HPP
