#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "spikecast/http.hpp"
#include "spikecast/ingestion/raw_post.hpp"
#include "spikecast/parallel.hpp"

namespace spikecast {

struct FetchResult {
    bool ok = false;
    std::string body;
    std::string error;
};

class PageFetcher {
public:
    virtual ~PageFetcher() = default;
    // Must be safe to call from several threads at once.
    virtual FetchResult fetch(const std::string& url) const = 0;
};

class HttpPageFetcher : public PageFetcher {
public:
    explicit HttpPageFetcher(int timeout_seconds = 15) : timeout_(timeout_seconds) {}

    FetchResult fetch(const std::string& url) const override {
        try {
            auto parts = split_url(url);
            auto client = make_http_client(parts.origin, timeout_);
            auto res = client->Get(parts.target);
            if (!res) return {false, {}, httplib::to_string(res.error())};
            if (res->status != 200) return {false, {}, "HTTP " + std::to_string(res->status)};
            return {true, res->body, {}};
        } catch (const std::exception& e) {
            return {false, {}, e.what()};
        }
    }

private:
    int timeout_;
};

// In-memory url -> body map; unknown urls fail with "not found".
class MapPageFetcher : public PageFetcher {
public:
    explicit MapPageFetcher(std::map<std::string, std::string> pages) : pages_(std::move(pages)) {}

    FetchResult fetch(const std::string& url) const override {
        auto it = pages_.find(url);
        if (it == pages_.end()) return {false, {}, "not found"};
        return {true, it->second, {}};
    }

private:
    std::map<std::string, std::string> pages_;
};

// Directory with index.json mapping url -> file name (relative to the dir).
class DirectoryPageFetcher : public PageFetcher {
public:
    explicit DirectoryPageFetcher(const std::filesystem::path& dir) : dir_(dir) {
        std::ifstream in(dir / "index.json");
        if (!in) throw IoError("cannot open " + (dir / "index.json").string());
        index_ = Json::parse(in).get<std::map<std::string, std::string>>();
    }

    FetchResult fetch(const std::string& url) const override {
        auto it = index_.find(url);
        if (it == index_.end()) return {false, {}, "not found"};
        std::ifstream in(dir_ / it->second, std::ios::binary);
        if (!in) return {false, {}, "missing file " + it->second};
        std::ostringstream ss;
        ss << in.rdbuf();
        return {true, ss.str(), {}};
    }

private:
    std::filesystem::path dir_;
    std::map<std::string, std::string> index_;
};

struct FetchedPage {
    std::string url;
    std::string raw_html;
};

struct FetchFailure {
    std::string url;
    std::string error;
};

struct LinkedPages {
    std::vector<FetchedPage> pages;
    std::vector<FetchFailure> failures;
};

// Fetches up to max_pages of the post's outbound links in listed order.
// Per-page failures are recorded, never thrown.
inline LinkedPages fetch_linked_pages(const RawPost& post, const PageFetcher& fetcher, int max_pages,
                                      std::size_t max_in_flight = 8) {
    if (max_pages < 0) throw ConfigError("max_pages must be >= 0");
    const std::size_t n = std::min(post.outbound_urls.size(), static_cast<std::size_t>(max_pages));
    auto results = bounded_parallel_map(n, max_in_flight, [&](std::size_t i) {
        return fetcher.fetch(post.outbound_urls[i]);
    });
    LinkedPages out;
    for (std::size_t i = 0; i < n; ++i) {
        if (results[i].ok) out.pages.push_back({post.outbound_urls[i], std::move(results[i].body)});
        else out.failures.push_back({post.outbound_urls[i], results[i].error});
    }
    return out;
}

}  // namespace spikecast
