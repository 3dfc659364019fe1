#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "spikecast/baseline/baseline.hpp"
#include "spikecast/core/csv.hpp"
#include "spikecast/core/text.hpp"
#include "spikecast/core/types.hpp"

namespace spikecast {

// Where a network's users are; resolves regional relevance features.
struct NetworkRegion {
    std::string country;    // key into nation_relevance, e.g. "DE"
    std::string continent;  // key into continent_relevance, e.g. "Europe"
};

struct FeatureOptions {
    int window_days = 3;
    std::map<std::string, NetworkRegion> regions;  // networks in scope; empty = every scored network
};

// Columns carried over from the event metadata, in output order.
inline const std::vector<std::string> kEventFeatureColumns{
    "date",          "time",         "event_utc",           "description",      "category",
    "entities",      "platforms",    "data_per_user_mb",    "audience_size",    "continent_relevance",
    "nation_relevance", "spike_duration_hours", "likelihood"};

struct FeatureTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> warnings;

    std::string to_csv() const {
        std::string out = csv_line(columns);
        for (const auto& r : rows) out += csv_line(r);
        return out;
    }
};

namespace detail {

inline std::string joined(const std::optional<StringList>& l) { return l ? join(*l, ";") : ""; }

inline std::string relevance_for(const std::optional<RelevanceMap>& m, const std::string& key) {
    if (!m || key.empty()) return "";
    auto it = m->find(key);
    return it == m->end() ? "0" : format_real(it->second);
}

// Largest scored z inside [lo, hi); nullopt when no scored sample falls there.
inline std::optional<double> peak_z_in(const ZSeries& z, UtcTime lo, UtcTime hi) {
    std::optional<double> best;
    for (std::size_t i = 0; i < z.z_values.size(); ++i) {
        const UtcTime t = z.time_at(i);
        if (t < lo || !(t < hi) || std::isnan(z.z_values[i])) continue;
        if (!best || z.z_values[i] > *best) best = z.z_values[i];
    }
    return best;
}

}  // namespace detail

// One row per (event, network in scope). The window is centred on the event
// time; the target is the peak z observed on that network inside the window,
// empty when no scored traffic overlaps it (a future window). Signature
// levels come from `levels` so the columns stay fixed.
inline FeatureTable export_features(const std::vector<EventAbstraction>& events, const std::vector<ZSeries>& zseries,
                                    const std::vector<int>& levels, const FeatureOptions& opts = {}) {
    if (opts.window_days <= 0) throw ConfigError("window_days must be > 0");
    std::map<std::string, const ZSeries*> by_net;
    for (const auto& z : zseries) by_net[z.network_id] = &z;
    std::set<std::string> networks;
    if (opts.regions.empty())
        for (const auto& [n, z] : by_net) networks.insert(n);
    else
        for (const auto& [n, r] : opts.regions) networks.insert(n);

    FeatureTable t;
    t.columns = {"event_id", "network_id", "window_start", "window_end"};
    t.columns.insert(t.columns.end(), kEventFeatureColumns.begin(), kEventFeatureColumns.end());
    for (int k : levels) t.columns.push_back("sig_k" + std::to_string(k));
    t.columns.push_back("target_peak_z");

    const std::int64_t half = static_cast<std::int64_t>(opts.window_days) * kSecondsPerDay / 2;
    for (const auto& e : events) {
        const bool has_sig = e.semantic_signature && e.semantic_signature->levels == levels;
        if (!has_sig) t.warnings.push_back(e.event_id + ": no semantic signature for the configured levels");
        const UtcTime lo = e.event_utc.plus_seconds(-half), hi = e.event_utc.plus_seconds(half);
        for (const auto& net : networks) {
            NetworkRegion region;
            if (auto it = opts.regions.find(net); it != opts.regions.end()) region = it->second;
            std::vector<std::string> row{e.event_id,
                                         net,
                                         format_utc(lo),
                                         format_utc(hi),
                                         e.date,
                                         e.time,
                                         format_utc(e.event_utc),
                                         e.description,
                                         e.category.value_or(""),
                                         detail::joined(e.entities),
                                         detail::joined(e.platforms),
                                         e.data_per_user_mb ? std::to_string(*e.data_per_user_mb) : "",
                                         e.audience_size ? std::to_string(*e.audience_size) : "",
                                         detail::relevance_for(e.continent_relevance, region.continent),
                                         detail::relevance_for(e.nation_relevance, region.country),
                                         e.spike_duration_hours ? format_real(*e.spike_duration_hours) : "",
                                         e.likelihood ? std::to_string(*e.likelihood) : ""};
            for (std::size_t l = 0; l < levels.size(); ++l)
                row.push_back(has_sig ? std::to_string(e.semantic_signature->cluster_ids[l]) : "");
            std::optional<double> target;
            if (auto it = by_net.find(net); it != by_net.end()) target = detail::peak_z_in(*it->second, lo, hi);
            row.push_back(target ? format_real(*target) : "");
            t.rows.push_back(std::move(row));
        }
    }
    return t;
}

}  // namespace spikecast
