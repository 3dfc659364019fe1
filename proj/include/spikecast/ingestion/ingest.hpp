#pragma once

#include <string>
#include <vector>

#include "spikecast/ingestion/assemble.hpp"
#include "spikecast/ingestion/connector.hpp"

namespace spikecast {

struct IngestOptions {
    int max_pages = 3;
    std::size_t max_in_flight = 8;
    AssembleOptions assemble;
};

struct IngestResult {
    std::vector<ContentRecord> records;
    SkipReport skips;
    std::vector<std::string> discarded;
    std::vector<FetchFailure> fetch_failures;
    std::size_t posts_listed = 0;
};

// list_posts -> fetch_linked_pages -> assemble_content_record for one source.
inline IngestResult ingest(const SourceConnector& connector, const FilterConfig& filter,
                           const PageFetcher* fetcher, const IngestOptions& opts = {}) {
    IngestResult out;
    auto listed = list_posts(connector, filter);
    out.skips = std::move(listed.skips);
    out.posts_listed = listed.posts.size();
    for (const auto& post : listed.posts) {
        LinkedPages linked;
        if (fetcher) linked = fetch_linked_pages(post, *fetcher, opts.max_pages, opts.max_in_flight);
        out.fetch_failures.insert(out.fetch_failures.end(), linked.failures.begin(), linked.failures.end());
        auto res = assemble_content_record(post, linked.pages, opts.assemble);
        if (res.record) out.records.push_back(std::move(*res.record));
        else out.discarded.push_back(res.discard_reason);
    }
    return out;
}

}  // namespace spikecast
