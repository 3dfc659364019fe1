#pragma once

#include <chrono>
#include <cstdlib>
#include <memory>
#include <string>
#include <string_view>

#include <httplib.h>

#include "spikecast/error.hpp"

namespace spikecast {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string target;  // path + query, at least "/"
};

inline SplitUrl split_url(std::string_view url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) throw ConfigError("URL lacks a scheme: " + std::string(url));
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string_view::npos) return {std::string(url), "/"};
    return {std::string(url.substr(0, path_start)), std::string(url.substr(path_start))};
}

inline std::unique_ptr<httplib::Client> make_http_client(const std::string& origin, int timeout_seconds) {
    auto client = std::make_unique<httplib::Client>(origin);
    client->set_connection_timeout(timeout_seconds, 0);
    client->set_read_timeout(timeout_seconds, 0);
    client->set_write_timeout(timeout_seconds, 0);
    client->set_follow_location(true);
    return client;
}

// Reads a secret from the environment; empty when the variable is unset.
inline std::string token_from_env(const std::string& var) {
    if (var.empty()) return {};
    const char* v = std::getenv(var.c_str());
    return v ? std::string(v) : std::string();
}

inline bool is_retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace spikecast
