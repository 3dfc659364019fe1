#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "spikecast/http.hpp"
#include "spikecast/ingestion/filter.hpp"
#include "spikecast/ingestion/rate_limiter.hpp"

namespace spikecast {

struct SkipReport {
    std::size_t skipped = 0;
    std::vector<std::string> reasons;

    void add(std::string reason) {
        ++skipped;
        reasons.push_back(std::move(reason));
    }
};

// Source of candidate posts. Implementations never hold mutable state that
// list() changes.
class SourceConnector {
public:
    virtual ~SourceConnector() = default;
    // All candidate posts the source offers for this filter. Malformed items
    // are skipped and noted in `skips`.
    virtual std::vector<RawPost> fetch_candidates(const FilterConfig& filter, SkipReport& skips) const = 0;
};

// JSONL file of RawPost objects, one per line.
class FileCorpusConnector : public SourceConnector {
public:
    explicit FileCorpusConnector(std::filesystem::path path) : path_(std::move(path)) {}

    std::vector<RawPost> fetch_candidates(const FilterConfig&, SkipReport& skips) const override {
        std::ifstream in(path_);
        if (!in) throw IoError("cannot open corpus " + path_.string());
        std::vector<RawPost> posts;
        std::set<std::string> seen;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            const std::string where = path_.filename().string() + ":" + std::to_string(lineno);
            try {
                auto post = Json::parse(line).get<RawPost>();
                if (!seen.insert(post.post_id).second) {
                    skips.add(where + ": duplicate post_id " + post.post_id);
                    continue;
                }
                posts.push_back(std::move(post));
            } catch (const std::exception& e) {
                skips.add(where + ": " + e.what());
            }
        }
        return posts;
    }

private:
    std::filesystem::path path_;
};

struct HttpConnectorConfig {
    std::string base_url;           // e.g. http://host:8080
    std::string path = "/posts";
    std::string auth_token_env;     // name of the env var holding a bearer token
    double requests_per_minute = 60;
    int timeout_seconds = 30;
    int max_pages = 100;
    BackoffPolicy backoff;
};

// Generic paginated JSON API:
//   GET {path}?q=<terms>&communities=<list>&min_score=<n>[&after=<cursor>]
//   -> {"posts": [RawPost...], "next": <cursor or null>}
class HttpJsonConnector : public SourceConnector {
public:
    explicit HttpJsonConnector(HttpConnectorConfig cfg)
        : cfg_(std::move(cfg)), limiter_(std::make_shared<RateLimiter>(cfg_.requests_per_minute)) {}

    HttpJsonConnector(HttpConnectorConfig cfg, std::shared_ptr<RateLimiter> limiter)
        : cfg_(std::move(cfg)), limiter_(std::move(limiter)) {}

    std::vector<RawPost> fetch_candidates(const FilterConfig& filter, SkipReport& skips) const override {
        auto client = make_http_client(cfg_.base_url, cfg_.timeout_seconds);
        const std::string token = token_from_env(cfg_.auth_token_env);
        httplib::Headers headers;
        if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

        std::vector<RawPost> posts;
        std::set<std::string> seen;
        std::string cursor;
        for (int page = 0; page < cfg_.max_pages; ++page) {
            httplib::Params params{{"q", join(filter.search_terms, ",")},
                                   {"communities", join(filter.communities, ",")},
                                   {"min_score", std::to_string(filter.min_engagement)}};
            if (!cursor.empty()) params.emplace("after", cursor);
            Json body = get_with_retry(*client, params, headers);
            if (!body.contains("posts") || !body["posts"].is_array())
                throw IoError("connector response lacks a 'posts' array");
            for (const auto& item : body["posts"]) {
                try {
                    auto post = item.get<RawPost>();
                    if (!seen.insert(post.post_id).second) {
                        skips.add("duplicate post_id " + post.post_id);
                        continue;
                    }
                    posts.push_back(std::move(post));
                } catch (const std::exception& e) {
                    skips.add(std::string("malformed post: ") + e.what());
                }
            }
            if (!body.contains("next") || body["next"].is_null()) break;
            cursor = body["next"].is_string() ? body["next"].get<std::string>() : body["next"].dump();
        }
        return posts;
    }

private:
    Json get_with_retry(httplib::Client& client, const httplib::Params& params,
                        const httplib::Headers& headers) const {
        std::string last_error;
        for (int attempt = 0; attempt <= cfg_.backoff.max_retries; ++attempt) {
            if (attempt) std::this_thread::sleep_for(cfg_.backoff.delay(attempt - 1));
            limiter_->acquire();
            auto res = client.Get(cfg_.path, params, headers);
            if (!res) {
                last_error = httplib::to_string(res.error());
                continue;
            }
            if (is_retryable_status(res->status)) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200) throw IoError("connector HTTP " + std::to_string(res->status));
            try {
                return Json::parse(res->body);
            } catch (const Json::parse_error& e) {
                throw IoError(std::string("connector returned invalid JSON: ") + e.what());
            }
        }
        throw IoError("connector unreachable after " + std::to_string(cfg_.backoff.max_retries + 1) +
                      " attempts: " + last_error);
    }

    HttpConnectorConfig cfg_;
    std::shared_ptr<RateLimiter> limiter_;
};

struct ListResult {
    std::vector<RawPost> posts;
    SkipReport skips;
};

// Candidates from the connector that satisfy the filter, in source order.
inline ListResult list_posts(const SourceConnector& connector, const FilterConfig& filter) {
    validate(filter);
    ListResult out;
    for (auto& p : connector.fetch_candidates(filter, out.skips))
        if (passes_filter(p, filter)) out.posts.push_back(std::move(p));
    return out;
}

}  // namespace spikecast
