#pragma once

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "spikecast/core/store.hpp"
#include "spikecast/http.hpp"
#include "spikecast/ingestion/clean.hpp"

namespace spikecast {

struct RetrievedDoc {
    std::string title;
    std::string summary;  // cleaned text
    std::string url;
    friend bool operator==(const RetrievedDoc&, const RetrievedDoc&) = default;
};

inline void to_json(Json& j, const RetrievedDoc& d) {
    j = Json{{"title", d.title}, {"summary", d.summary}, {"url", d.url}};
}
inline void from_json(const Json& j, RetrievedDoc& d) {
    d.title = j.value("title", "");
    d.summary = j.contains("summary") ? j["summary"].get<std::string>() : j.value("text", "");
    d.url = j.value("url", "");
}

struct ContextBundle {
    std::string event_id;
    std::vector<RetrievedDoc> retrieved_docs;
    std::vector<std::string> warnings;
};

// Encyclopedia-style lookup: ranked documents for a free-text query.
class RetrievalClient {
public:
    virtual ~RetrievalClient() = default;
    virtual std::vector<RetrievedDoc> search(const std::string& query, std::size_t limit) const = 0;
};

// Ranks a fixed article set: an exact title match first, then 3 points per
// query token in the title plus 1 per token in the text. Ties by title.
class FixtureRetriever : public RetrievalClient {
public:
    explicit FixtureRetriever(std::vector<RetrievedDoc> docs) : docs_(std::move(docs)) {}

    static FixtureRetriever from_file(const std::filesystem::path& path) {
        return FixtureRetriever(read_jsonl<RetrievedDoc>(path));
    }

    std::vector<RetrievedDoc> search(const std::string& query, std::size_t limit) const override {
        const auto q = tokenize(query);
        const std::set<std::string> qset(q.begin(), q.end());
        const std::string qnorm = normalize_vote(query);
        std::vector<std::pair<int, const RetrievedDoc*>> scored;
        for (const auto& d : docs_) {
            auto tt = tokenize(d.title);
            auto xt = tokenize(d.summary);
            std::set<std::string> title_set(tt.begin(), tt.end()), text_set(xt.begin(), xt.end());
            int score = normalize_vote(d.title) == qnorm ? 1000 : 0;
            for (const auto& t : qset) score += 3 * static_cast<int>(title_set.count(t)) + static_cast<int>(text_set.count(t));
            if (score > 0) scored.emplace_back(score, &d);
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second->title < b.second->title;
        });
        std::vector<RetrievedDoc> out;
        for (std::size_t i = 0; i < scored.size() && i < limit; ++i) out.push_back(*scored[i].second);
        return out;
    }

private:
    std::vector<RetrievedDoc> docs_;
};

// GET {base}/search?q=<query>&limit=<n> -> {"results": [{title, summary, url}]}
class HttpRetriever : public RetrievalClient {
public:
    HttpRetriever(std::string base_url, int timeout_seconds = 10)
        : base_(std::move(base_url)), timeout_(timeout_seconds) {}

    std::vector<RetrievedDoc> search(const std::string& query, std::size_t limit) const override {
        auto parts = split_url(base_);
        auto client = make_http_client(parts.origin, timeout_);
        std::string path = parts.target == "/" ? "/search" : parts.target + "/search";
        auto res = client->Get(path, httplib::Params{{"q", query}, {"limit", std::to_string(limit)}},
                               httplib::Headers{});
        if (!res) throw BackendError("retriever: " + httplib::to_string(res.error()));
        if (res->status != 200) throw BackendError("retriever HTTP " + std::to_string(res->status));
        auto body = Json::parse(res->body, nullptr, false);
        if (body.is_discarded() || !body.contains("results")) throw BackendError("retriever: bad response", false);
        return body["results"].get<std::vector<RetrievedDoc>>();
    }

private:
    std::string base_;
    int timeout_;
};

struct EnrichOptions {
    std::size_t max_docs = 3;
    std::size_t doc_char_cap = 1500;
};

// Queries the retriever with each entity, then the description, merging the
// ranked results (first occurrence of a URL wins) up to max_docs. Retrieval
// failures yield an empty bundle with a warning.
inline ContextBundle enrich_with_context(const EventAbstraction& event, const RetrievalClient& retriever,
                                         const EnrichOptions& opts = {}) {
    ContextBundle bundle;
    bundle.event_id = event.event_id;
    std::vector<std::string> queries;
    if (event.entities) queries = *event.entities;
    if (!event.description.empty()) queries.push_back(event.description);
    if (queries.empty()) throw PreconditionError("event has neither entities nor description");
    if (opts.max_docs == 0) return bundle;

    std::set<std::string> seen;
    try {
        for (const auto& q : queries) {
            for (auto& doc : retriever.search(q, opts.max_docs)) {
                const std::string key = doc.url.empty() ? doc.title : doc.url;
                if (!seen.insert(key).second) continue;
                doc.summary = clean_text(doc.summary, TextFormat::html, opts.doc_char_cap);
                bundle.retrieved_docs.push_back(std::move(doc));
                if (bundle.retrieved_docs.size() >= opts.max_docs) return bundle;
            }
        }
    } catch (const std::exception& e) {
        bundle.retrieved_docs.clear();
        bundle.warnings.push_back(std::string("retrieval failed, continuing without context: ") + e.what());
    }
    return bundle;
}

}  // namespace spikecast
