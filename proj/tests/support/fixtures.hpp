#pragma once

// Locates the bundled fixtures (paths baked in at configure time).

#include <fstream>
#include <json.hpp>
#include <stdexcept>
#include <string>

#ifndef WEBPURGE_FIXTURE_DIR
#error "WEBPURGE_FIXTURE_DIR must be defined by the build"
#endif

namespace testsupport {

inline std::string fixture_path(const std::string& name) {
    return std::string(WEBPURGE_FIXTURE_DIR) + "/" + name;
}

inline nlohmann::json load_json_fixture(const std::string& name) {
    std::ifstream in(fixture_path(name));
    if (!in) throw std::runtime_error("missing fixture: " + name);
    nlohmann::json j;
    in >> j;
    return j;
}

}  // namespace testsupport
