#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "spikecast/core/store.hpp"
#include "spikecast/dedup/embed.hpp"
#include "spikecast/dedup/kmeans.hpp"
#include "spikecast/parallel.hpp"

namespace spikecast {

inline const std::vector<int> kDefaultLevels{10, 100, 1000, 10000};

struct MultilevelModels {
    std::vector<int> levels;            // configured k per level
    std::vector<ClusterModel> models;   // one per level, k clamped to the corpus

    friend bool operator==(const MultilevelModels&, const MultilevelModels&) = default;
};

inline void to_json(Json& j, const MultilevelModels& m) {
    j = Json{{"schema_version", kSchemaVersion}, {"levels", m.levels}, {"models", m.models}};
}
inline void from_json(const Json& j, MultilevelModels& m) {
    detail::check_schema(j);
    j.at("levels").get_to(m.levels);
    j.at("models").get_to(m.models);
    if (m.levels.size() != m.models.size()) throw ValidationError("models", "one model per level expected");
}

struct MultilevelResult {
    MultilevelModels models;
    std::map<std::string, SemanticSignature> signatures;
};

// Independent k-means per level; an event's signature lists its cluster per
// level in level order.
inline MultilevelResult cluster_multilevel(const std::vector<EventEmbedding>& embeddings,
                                           const std::vector<int>& levels, std::uint64_t seed, int restarts = 1,
                                           std::size_t max_in_flight = 4) {
    if (embeddings.empty()) throw PreconditionError("clustering needs at least one embedding");
    if (levels.empty()) throw ConfigError("at least one clustering level is required");
    for (int k : levels)
        if (k < 1) throw ConfigError("clustering levels must be >= 1");
    Points pts;
    for (const auto& e : embeddings) pts.push_back(e.vector);

    auto runs = bounded_parallel_map(levels.size(), max_in_flight,
                                     [&](std::size_t l) { return kmeans_best_of(pts, levels[l], seed, restarts); });

    MultilevelResult out;
    out.models.levels = levels;
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        SemanticSignature sig;
        sig.levels = levels;
        for (const auto& r : runs) sig.cluster_ids.push_back(r.assignments[i]);
        out.signatures[embeddings[i].event_id] = std::move(sig);
    }
    for (auto& r : runs) out.models.models.push_back(std::move(r.model));
    return out;
}

// Signature of a new event from persisted models.
inline SemanticSignature assign_signature(const MultilevelModels& m, const std::vector<double>& v) {
    SemanticSignature sig;
    sig.levels = m.levels;
    for (const auto& model : m.models) {
        if (!model.centroids.empty() && model.centroids[0].size() != v.size())
            throw PreconditionError("embedding dimension differs from the cluster models");
        sig.cluster_ids.push_back(nearest_centroid(model.centroids, v));
    }
    return sig;
}

inline void save_models(const std::filesystem::path& path, const MultilevelModels& m) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << Json(m).dump() << "\n";
    if (!out) throw IoError("short write to " + path.string());
}

inline MultilevelModels load_models(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return Json::parse(in).get<MultilevelModels>();
}

}  // namespace spikecast
