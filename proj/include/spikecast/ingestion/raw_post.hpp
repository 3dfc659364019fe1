#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spikecast/core/serialize.hpp"
#include "spikecast/core/text.hpp"

namespace spikecast {

struct RawComment {
    std::string body;  // raw markup
    std::int64_t score = 0;
    friend bool operator==(const RawComment&, const RawComment&) = default;
};

struct RawPost {
    std::string post_id;
    std::string community;
    std::string title;
    std::string body;  // raw markup
    std::int64_t score = 0;
    std::vector<std::string> outbound_urls;
    std::vector<RawComment> comments_raw;  // top-level comments only
    UtcTime created_at;
    std::string url;                      // permalink; synthesized when absent
    std::optional<UtcTime> fetched_at;    // defaults to created_at

    friend bool operator==(const RawPost&, const RawPost&) = default;
};

inline std::string permalink(const RawPost& p) {
    return p.url.empty() ? "post://" + p.community + "/" + p.post_id : p.url;
}

inline void to_json(Json& j, const RawComment& c) { j = Json{{"body", c.body}, {"score", c.score}}; }

inline void from_json(const Json& j, RawComment& c) {
    if (j.is_string()) {
        c = RawComment{j.get<std::string>(), 0};
        return;
    }
    j.at("body").get_to(c.body);
    c.score = j.value("score", std::int64_t{0});
}

inline void to_json(Json& j, const RawPost& p) {
    j = Json{{"schema_version", kSchemaVersion},
             {"post_id", p.post_id},
             {"community", p.community},
             {"title", p.title},
             {"body", p.body},
             {"score", p.score},
             {"outbound_urls", p.outbound_urls},
             {"comments_raw", p.comments_raw},
             {"created_at", p.created_at},
             {"url", p.url}};
    if (p.fetched_at) j["fetched_at"] = *p.fetched_at;
}

inline void from_json(const Json& j, RawPost& p) {
    j.at("post_id").get_to(p.post_id);
    if (p.post_id.empty()) throw ValidationError("post_id", "empty");
    p.community = j.value("community", "");
    p.title = j.value("title", "");
    p.body = j.value("body", "");
    p.score = j.value("score", std::int64_t{0});
    p.outbound_urls = j.value("outbound_urls", std::vector<std::string>{});
    p.comments_raw = j.value("comments_raw", std::vector<RawComment>{});
    j.at("created_at").get_to(p.created_at);
    p.url = j.value("url", "");
    if (j.contains("fetched_at") && !j["fetched_at"].is_null()) p.fetched_at = j["fetched_at"].get<UtcTime>();
    else p.fetched_at.reset();
}

}  // namespace spikecast
