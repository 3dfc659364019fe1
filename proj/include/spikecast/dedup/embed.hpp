#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "spikecast/core/serialize.hpp"
#include "spikecast/core/text.hpp"
#include "spikecast/http.hpp"
#include "spikecast/parallel.hpp"

namespace spikecast {

struct EventEmbedding {
    std::string event_id;
    std::vector<double> vector;
    double norm = 0.0;

    friend bool operator==(const EventEmbedding&, const EventEmbedding&) = default;
};

inline double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline void to_json(Json& j, const EventEmbedding& e) {
    j = Json{{"schema_version", kSchemaVersion}, {"event_id", e.event_id}, {"vector", e.vector}, {"norm", e.norm}};
}
inline void from_json(const Json& j, EventEmbedding& e) {
    detail::check_schema(j);
    j.at("event_id").get_to(e.event_id);
    j.at("vector").get_to(e.vector);
    e.norm = l2_norm(e.vector);
}

// text -> fixed-dimension vector.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<double> embed(const std::string& text) = 0;
};

// Signed random projection of the token multiset: every token owns a
// pseudo-random ±1 direction derived from its hash, and a text is the sum of
// its tokens' directions. Same text, same vector; shared tokens, high cosine.
class HashingEmbedder : public Embedder {
public:
    explicit HashingEmbedder(std::size_t dimension = 256, std::uint64_t salt = 0) : dim_(dimension), salt_(salt) {
        if (dim_ == 0) throw ConfigError("embedding dimension must be > 0");
    }

    std::vector<double> embed(const std::string& text) override {
        std::vector<double> v(dim_, 0.0);
        for (const auto& tok : tokenize(text)) {
            std::uint64_t state = fnv1a64(tok) ^ salt_;
            for (std::size_t d = 0; d < dim_; d += 64) {
                state = splitmix64(state);
                for (std::size_t b = 0; b < 64 && d + b < dim_; ++b) v[d + b] += (state >> b) & 1u ? 1.0 : -1.0;
            }
        }
        return v;
    }

    std::size_t dimension() const { return dim_; }

private:
    std::size_t dim_;
    std::uint64_t salt_;
};

// Vectors looked up by exact text from a JSON object {text: [..]}.
class FixtureEmbedder : public Embedder {
public:
    explicit FixtureEmbedder(std::map<std::string, std::vector<double>> table) : table_(std::move(table)) {}

    static FixtureEmbedder from_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open embedding fixtures " + path.string());
        return FixtureEmbedder(Json::parse(in).get<std::map<std::string, std::vector<double>>>());
    }

    std::vector<double> embed(const std::string& text) override {
        auto it = table_.find(text);
        if (it == table_.end()) throw BackendError("no embedding fixture for text '" + text + "'", false);
        return it->second;
    }

private:
    std::map<std::string, std::vector<double>> table_;
};

// POST {model, input} -> {"vector": [...]} (also accepts "embedding" or
// {"data": [{"embedding": [...]}]}).
class HttpEmbedder : public Embedder {
public:
    HttpEmbedder(std::string endpoint_url, std::string model, int timeout_seconds = 30, std::string api_key_env = {})
        : url_(split_url(endpoint_url)), model_(std::move(model)), timeout_(timeout_seconds),
          token_(token_from_env(api_key_env)) {}

    std::vector<double> embed(const std::string& text) override {
        auto client = make_http_client(url_.origin, timeout_);
        httplib::Headers headers;
        if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
        auto res = client->Post(url_.target, headers, Json{{"model", model_}, {"input", text}}.dump(),
                                "application/json");
        if (!res) throw BackendError("embedder: " + httplib::to_string(res.error()));
        if (res->status != 200)
            throw BackendError("embedder HTTP " + std::to_string(res->status), is_retryable_status(res->status));
        auto body = Json::parse(res->body, nullptr, false);
        if (body.is_discarded()) throw BackendError("embedder response is not JSON", false);
        if (body.contains("vector")) return body["vector"].get<std::vector<double>>();
        if (body.contains("embedding")) return body["embedding"].get<std::vector<double>>();
        if (body.contains("data") && body["data"].is_array() && !body["data"].empty())
            return body["data"][0].at("embedding").get<std::vector<double>>();
        throw BackendError("embedder response carries no vector", false);
    }

private:
    SplitUrl url_;
    std::string model_;
    int timeout_;
    std::string token_;
};

// Canonical free-text summary: description, then category, then the entity
// list sorted, so equal content always yields equal text.
inline std::string event_summary(const EventAbstraction& e) {
    std::string out = collapse_whitespace(e.description);
    if (e.category) out += " | " + collapse_whitespace(*e.category);
    if (e.entities && !e.entities->empty()) {
        StringList ents;
        for (const auto& x : *e.entities) ents.push_back(collapse_whitespace(x));
        std::sort(ents.begin(), ents.end());
        out += " | " + join(ents, "; ");
    }
    return out;
}

inline EventEmbedding embed_event(const EventAbstraction& e, Embedder& embedder, int retries = 2) {
    if (e.description.empty()) throw PreconditionError("event " + e.event_id + " has no description to embed");
    const std::string text = event_summary(e);
    for (int attempt = 0;; ++attempt) {
        try {
            auto v = embedder.embed(text);
            for (double x : v)
                if (!std::isfinite(x)) throw BackendError("embedding has non-finite entries", false);
            const double n = l2_norm(v);
            if (v.empty() || n == 0.0) throw BackendError("embedding is empty or zero", false);
            return EventEmbedding{e.event_id, std::move(v), n};
        } catch (const Error& err) {
            if (!err.retryable() || attempt >= retries) throw;
        }
    }
}

struct EmbedBatch {
    std::vector<EventEmbedding> embeddings;  // input order, un-embedded ones skipped
    std::vector<std::string> unembedded;     // excluded from dedup and clustering
    std::vector<std::string> warnings;
};

inline EmbedBatch embed_events(const std::vector<EventAbstraction>& events, Embedder& embedder,
                               std::size_t max_in_flight = 4) {
    struct One {
        std::optional<EventEmbedding> emb;
        std::string error;
    };
    auto results = bounded_parallel_map(events.size(), max_in_flight, [&](std::size_t i) {
        One o;
        try {
            o.emb = embed_event(events[i], embedder);
        } catch (const PreconditionError&) {
            throw;
        } catch (const Error& e) {
            o.error = e.what();
        }
        return o;
    });
    EmbedBatch batch;
    std::size_t dim = 0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        auto& r = results[i];
        if (r.emb && dim && r.emb->vector.size() != dim) {
            r.error = "dimension " + std::to_string(r.emb->vector.size()) + " differs from corpus dimension " +
                      std::to_string(dim);
            r.emb.reset();
        }
        if (r.emb) {
            dim = r.emb->vector.size();
            batch.embeddings.push_back(std::move(*r.emb));
        } else {
            batch.unembedded.push_back(events[i].event_id);
            batch.warnings.push_back(events[i].event_id + ": " + r.error);
        }
    }
    return batch;
}

}  // namespace spikecast
