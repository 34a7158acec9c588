#ifndef WEBPURGE_RECIPE_HPP
#define WEBPURGE_RECIPE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "webpurge/hash.hpp"
#include "webpurge/origin.hpp"
#include "webpurge/util.hpp"

namespace webpurge {

class RecipeParseError : public std::runtime_error {
  public:
    explicit RecipeParseError(const std::string& what, std::string field = "")
        : std::runtime_error(what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

// The small artifact that replaces a purged file: enough to find the bytes
// again (source URLs), prove they are the same bytes (hashes), and put them
// back where they were (path, name, size, timestamps).
struct Recipe {
    UnixTime created_at = 0;
    UnixTime last_maintained_at = 0;
    std::optional<std::string> referrer_url;  // RU, verbatim
    std::optional<std::string> host_url;      // HU, verbatim
    std::string original_path;
    std::string file_name;  // final path segment, extension included
    std::uint64_t size_bytes = 0;
    std::string hash_full;  // lowercase hex
    std::string hash_algo = "sha256";
    std::optional<std::string> partial_hash;  // over leading partial_len bytes
    std::uint64_t partial_len = kDefaultPartialLen;

    std::string recipe_id() const { return hash_full.substr(0, 16); }

    bool operator==(const Recipe&) const = default;
};

inline std::string path_file_name(const std::string& path) {
    size_t slash = path.find_last_of("/\\");
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

// serialize/deserialize: canonical JSON, keys sorted, all fields present
// (optionals as null). Unknown input fields are dropped; a warning sink can
// observe them.
inline std::string serialize_recipe(const Recipe& r) {
    nlohmann::json j;
    j["created_at"] = format_rfc3339(r.created_at);
    j["last_maintained_at"] = format_rfc3339(r.last_maintained_at);
    j["referrer_url"] = r.referrer_url ? nlohmann::json(*r.referrer_url) : nlohmann::json();
    j["host_url"] = r.host_url ? nlohmann::json(*r.host_url) : nlohmann::json();
    j["original_path"] = r.original_path;
    j["file_name"] = r.file_name;
    j["size_bytes"] = r.size_bytes;
    j["hash_full"] = r.hash_full;
    j["hash_algo"] = r.hash_algo;
    j["partial_hash"] = r.partial_hash ? nlohmann::json(*r.partial_hash) : nlohmann::json();
    j["partial_len"] = r.partial_len;
    return j.dump();
}

using WarnSink = std::function<void(const std::string&)>;

inline Recipe deserialize_recipe(const std::string& text, const WarnSink& warn = {}) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw RecipeParseError(std::string("recipe is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw RecipeParseError("recipe is not a JSON object");

    static const char* known[] = {"created_at", "last_maintained_at", "referrer_url",
                                  "host_url", "original_path", "file_name", "size_bytes",
                                  "hash_full", "hash_algo", "partial_hash", "partial_len"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok && warn) warn("ignoring unknown recipe field: " + it.key());
    }

    auto require = [&](const char* key) -> const nlohmann::json& {
        auto it = j.find(key);
        if (it == j.end() || it->is_null())
            throw RecipeParseError(std::string("missing required recipe field: ") + key, key);
        return *it;
    };
    auto require_string = [&](const char* key) -> std::string {
        const auto& v = require(key);
        if (!v.is_string())
            throw RecipeParseError(std::string("recipe field has wrong type: ") + key, key);
        return v.get<std::string>();
    };
    auto require_uint = [&](const char* key) -> std::uint64_t {
        const auto& v = require(key);
        if (!v.is_number_unsigned() && !v.is_number_integer())
            throw RecipeParseError(std::string("recipe field has wrong type: ") + key, key);
        if (v.is_number_integer() && v.get<std::int64_t>() < 0)
            throw RecipeParseError(std::string("recipe field is negative: ") + key, key);
        return v.get<std::uint64_t>();
    };
    auto optional_string = [&](const char* key) -> std::optional<std::string> {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) return std::nullopt;
        if (!it->is_string())
            throw RecipeParseError(std::string("recipe field has wrong type: ") + key, key);
        return it->get<std::string>();
    };

    Recipe r;
    auto created = parse_rfc3339(require_string("created_at"));
    if (!created) throw RecipeParseError("invalid timestamp in created_at", "created_at");
    r.created_at = *created;
    auto maintained = parse_rfc3339(require_string("last_maintained_at"));
    if (!maintained)
        throw RecipeParseError("invalid timestamp in last_maintained_at", "last_maintained_at");
    r.last_maintained_at = *maintained;
    r.referrer_url = optional_string("referrer_url");
    r.host_url = optional_string("host_url");
    r.original_path = require_string("original_path");
    r.file_name = require_string("file_name");
    r.size_bytes = require_uint("size_bytes");
    r.hash_full = require_string("hash_full");
    r.hash_algo = require_string("hash_algo");
    if (!is_hex_string(r.hash_full))
        throw RecipeParseError("hash_full is not lowercase hex", "hash_full");
    r.partial_hash = optional_string("partial_hash");
    auto pl = j.find("partial_len");
    r.partial_len = (pl != j.end() && !pl->is_null()) ? require_uint("partial_len")
                                                      : kDefaultPartialLen;
    return r;
}

// Builds the recipe for a live file from its already-computed hashes.
// Timestamps both start at `now`; URLs copy verbatim from provenance.
inline Recipe create_recipe(const std::string& path, std::uint64_t size_bytes,
                            const std::optional<OriginMetadata>& origin,
                            const FileHashes& hashes, UnixTime now,
                            const std::string& hash_algo = "sha256",
                            std::uint64_t partial_len = kDefaultPartialLen) {
    Recipe r;
    r.created_at = now;
    r.last_maintained_at = now;
    if (origin) {
        r.referrer_url = origin->referrer_url;
        r.host_url = origin->host_url;
    }
    r.original_path = path;
    r.file_name = path_file_name(path);
    r.size_bytes = size_bytes;
    r.hash_full = hashes.hash_full;
    r.hash_algo = hash_algo;
    r.partial_hash = hashes.partial_hash;
    r.partial_len = partial_len;
    return r;
}

}  // namespace webpurge

#endif  // WEBPURGE_RECIPE_HPP
