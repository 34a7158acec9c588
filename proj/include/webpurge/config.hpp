#ifndef WEBPURGE_CONFIG_HPP
#define WEBPURGE_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "webpurge/origin.hpp"

namespace webpurge {

struct Config {
    std::string store_dir;
    size_t top_n = 25;
    std::optional<std::uint64_t> target_free;
    size_t concurrency = 4;
    int timeout_secs = 30;
    bool presume_auth = true;   // CSP/webmail/collab hosts count as auth-gated without fetching
    bool presume_local = false; // file:// and drive-letter sources count as RdWithAuth
    bool allow_auth = false;    // let purge treat RdWithAuth candidates as eligible
    bool fixture_mode = false;  // read .zoneid sidecars instead of platform metadata
    bool use_trash = false;     // move purged files to .webpurge-trash instead of unlink
    std::string user_agent = "webpurge/1.0";
    std::string passphrase_env = "WEBPURGE_PASSPHRASE";
    CategoryLists categories;

    void validate() const {
        if (top_n < 1) throw std::invalid_argument("top_n must be >= 1");
        if (concurrency < 1) throw std::invalid_argument("concurrency must be >= 1");
        if (timeout_secs < 1) throw std::invalid_argument("timeout_secs must be >= 1");
    }
};

namespace detail {

inline void get_list(const nlohmann::json& j, const char* key, std::vector<std::string>& out) {
    if (auto it = j.find(key); it != j.end() && it->is_array())
        out = it->get<std::vector<std::string>>();
}

}  // namespace detail

inline Config config_from_json(const nlohmann::json& j) {
    Config c;
    auto set_if = [&](const char* key, auto& field) {
        using T = std::decay_t<decltype(field)>;
        if (auto it = j.find(key); it != j.end() && !it->is_null())
            field = it->get<T>();
    };
    set_if("store_dir", c.store_dir);
    set_if("top_n", c.top_n);
    if (auto it = j.find("target_free"); it != j.end() && !it->is_null())
        c.target_free = it->get<std::uint64_t>();
    set_if("concurrency", c.concurrency);
    set_if("timeout_secs", c.timeout_secs);
    set_if("presume_auth", c.presume_auth);
    set_if("presume_local", c.presume_local);
    set_if("allow_auth", c.allow_auth);
    set_if("fixture_mode", c.fixture_mode);
    set_if("use_trash", c.use_trash);
    set_if("user_agent", c.user_agent);
    set_if("passphrase_env", c.passphrase_env);
    if (auto it = j.find("categories"); it != j.end() && it->is_object()) {
        const auto& cat = *it;
        detail::get_list(cat, "webmail", c.categories.webmail);
        detail::get_list(cat, "cloud_collaboration", c.categories.cloud_collaboration);
        detail::get_list(cat, "big_tech_csp", c.categories.big_tech_csp);
        detail::get_list(cat, "small_csp", c.categories.small_csp);
        detail::get_list(cat, "tools", c.categories.tools);
        detail::get_list(cat, "login_host_prefixes", c.categories.login_host_prefixes);
    }
    c.validate();
    return c;
}

inline nlohmann::json config_to_json(const Config& c) {
    nlohmann::json j;
    j["store_dir"] = c.store_dir;
    j["top_n"] = c.top_n;
    if (c.target_free) j["target_free"] = *c.target_free;
    j["concurrency"] = c.concurrency;
    j["timeout_secs"] = c.timeout_secs;
    j["presume_auth"] = c.presume_auth;
    j["presume_local"] = c.presume_local;
    j["allow_auth"] = c.allow_auth;
    j["fixture_mode"] = c.fixture_mode;
    j["use_trash"] = c.use_trash;
    j["user_agent"] = c.user_agent;
    j["passphrase_env"] = c.passphrase_env;
    j["categories"] = {
        {"webmail", c.categories.webmail},
        {"cloud_collaboration", c.categories.cloud_collaboration},
        {"big_tech_csp", c.categories.big_tech_csp},
        {"small_csp", c.categories.small_csp},
        {"tools", c.categories.tools},
        {"login_host_prefixes", c.categories.login_host_prefixes},
    };
    return j;
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("config file " + path + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

inline void save_config(const Config& c, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write config file: " + path);
    out << config_to_json(c).dump(2) << '\n';
}

}  // namespace webpurge

#endif  // WEBPURGE_CONFIG_HPP
