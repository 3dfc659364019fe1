#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "spikecast/core/time.hpp"
#include "spikecast/error.hpp"

namespace spikecast {

// Uniformly sampled throughput of one network. Missing samples are NaN;
// every present sample is finite and non-negative.
struct TrafficSeries {
    std::string network_id;
    UtcTime start;
    std::int64_t step_seconds = 60;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    UtcTime time_at(std::size_t i) const {
        return start.plus_seconds(static_cast<std::int64_t>(i) * step_seconds);
    }
    UtcTime end() const { return time_at(values.size()); }
};

inline bool is_missing(double v) { return std::isnan(v); }

inline void validate(const TrafficSeries& s) {
    if (s.values.empty()) throw ValidationError("values", "traffic series is empty");
    if (s.step_seconds <= 0) throw ValidationError("step", "must be > 0");
    for (double v : s.values) {
        if (is_missing(v)) continue;
        if (!std::isfinite(v) || v < 0) throw ValidationError("values", "samples must be finite and >= 0");
    }
}

struct SpikeRecord {
    std::string spike_id;  // assigned by the store
    std::string network_id;
    UtcTime start;
    UtcTime end;
    double peak_z = 0;
    double mean_z = 0;
    double duration_minutes = 0;

    friend bool operator==(const SpikeRecord&, const SpikeRecord&) = default;
};

inline void validate(const SpikeRecord& s) {
    if (s.network_id.empty()) throw ValidationError("network_id", "empty");
    if (!(s.end > s.start)) throw ValidationError("end", "must be after start");
    if (std::abs(s.duration_minutes - minutes_between(s.start, s.end)) > 1e-9)
        throw ValidationError("duration_minutes", "must equal end - start");
    if (!std::isfinite(s.peak_z) || !std::isfinite(s.mean_z))
        throw ValidationError("peak_z", "must be finite");
    if (s.peak_z < s.mean_z) throw ValidationError("peak_z", "must be >= mean_z");
}

enum class SourceKind { forum_thread, linked_page, wiki_article };

struct LinkedText {
    std::string url;
    std::string text;
    friend bool operator==(const LinkedText&, const LinkedText&) = default;
};

struct ContentRecord {
    std::string record_id;
    SourceKind source = SourceKind::forum_thread;
    std::string url;
    UtcTime created_at;
    UtcTime fetched_at;
    std::string title;
    std::string body_text;
    std::vector<std::string> comments;
    std::int64_t engagement = 0;
    std::vector<LinkedText> linked_texts;

    friend bool operator==(const ContentRecord&, const ContentRecord&) = default;
};

inline bool has_content(const ContentRecord& r) {
    if (!r.body_text.empty()) return true;
    for (const auto& c : r.comments)
        if (!c.empty()) return true;
    for (const auto& l : r.linked_texts)
        if (!l.text.empty()) return true;
    return false;
}

inline void validate(const ContentRecord& r) {
    if (r.record_id.empty()) throw ValidationError("record_id", "empty");
    if (!has_content(r)) throw ValidationError("body_text", "record has no text after cleaning");
    if (r.created_at > r.fetched_at) throw ValidationError("created_at", "later than fetched_at");
    if (r.engagement < 0) throw ValidationError("engagement", "must be >= 0");
}

struct EventDraft {
    std::string headline;
    std::string date;  // YYYY-MM-DD
    std::string time;  // HH:MM[zone] or "unknown"
    std::string source_record;
    bool past_reference = false;  // date precedes the record's creation date

    friend bool operator==(const EventDraft&, const EventDraft&) = default;
};

inline constexpr const char* kUnknownTime = "unknown";

inline void validate(const EventDraft& d) {
    if (d.headline.empty()) throw ValidationError("headline", "empty");
    if (!parse_iso_date(d.date)) throw ValidationError("date", "not a calendar date: '" + d.date + "'");
    if (d.time != kUnknownTime && !parse_time_of_day(d.time))
        throw ValidationError("time", "not a time of day: '" + d.time + "'");
}

struct SemanticSignature {
    std::vector<int> levels;
    std::vector<int> cluster_ids;

    friend bool operator==(const SemanticSignature&, const SemanticSignature&) = default;
};

inline void validate(const SemanticSignature& s) {
    if (s.levels.size() != s.cluster_ids.size())
        throw ValidationError("semantic_signature", "levels and cluster_ids differ in length");
    for (std::size_t i = 0; i < s.levels.size(); ++i)
        if (s.cluster_ids[i] < 0 || s.cluster_ids[i] >= s.levels[i])
            throw ValidationError("semantic_signature", "cluster id out of range for level");
}

using RelevanceMap = std::map<std::string, double>;
using StringList = std::vector<std::string>;

// One parsed value of a metadata field.
using FieldValue = std::variant<std::string, StringList, std::int64_t, double, RelevanceMap>;

struct EventAbstraction {
    std::string event_id;
    // Fixed on creation.
    std::string date;
    std::string time;
    std::string description;
    UtcTime event_utc;  // derived from date/time and the configured default zone
    // Inferred.
    std::optional<std::string> category;
    std::optional<StringList> entities;
    std::optional<StringList> platforms;
    std::optional<std::int64_t> data_per_user_mb;
    std::optional<std::int64_t> audience_size;
    std::optional<RelevanceMap> continent_relevance;
    std::optional<RelevanceMap> nation_relevance;
    std::optional<double> spike_duration_hours;
    std::optional<int> likelihood;
    std::optional<SemanticSignature> semantic_signature;
    // Provenance.
    std::vector<std::string> source_records;
    UtcTime first_mentioned_at;
    std::vector<std::string> merge_history;
    std::set<std::string> low_confidence_fields;
    std::set<std::string> stale_fields;

    friend bool operator==(const EventAbstraction&, const EventAbstraction&) = default;
};

inline void validate_relevance(const std::optional<RelevanceMap>& m, const char* field) {
    if (!m) return;
    for (const auto& [k, v] : *m)
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(field, "relevance for '" + k + "' outside [0,1]");
}

inline void validate(const EventAbstraction& e) {
    if (e.description.empty()) throw ValidationError("description", "empty");
    if (!parse_iso_date(e.date)) throw ValidationError("date", "not a calendar date: '" + e.date + "'");
    if (e.time != kUnknownTime && !parse_time_of_day(e.time))
        throw ValidationError("time", "not a time of day: '" + e.time + "'");
    if (e.likelihood && (*e.likelihood < 0 || *e.likelihood > 10))
        throw ValidationError("likelihood", "must be in [0,10], got " + std::to_string(*e.likelihood));
    validate_relevance(e.continent_relevance, "continent_relevance");
    validate_relevance(e.nation_relevance, "nation_relevance");
    if (e.data_per_user_mb && *e.data_per_user_mb < 0) throw ValidationError("data_per_user_mb", "negative");
    if (e.audience_size && *e.audience_size < 0) throw ValidationError("audience_size", "negative");
    if (e.spike_duration_hours && !(*e.spike_duration_hours >= 0.0))
        throw ValidationError("spike_duration_hours", "must be >= 0");
    if (e.semantic_signature) validate(*e.semantic_signature);
    if (e.source_records.empty()) throw ValidationError("source_records", "empty");
}

// Clears every inferred field and marks it stale; used when a merge changes
// an event's evidence. Fixed-on-creation fields stay as they are.
inline void mark_stale(EventAbstraction& e) {
    e.category.reset();
    e.entities.reset();
    e.platforms.reset();
    e.data_per_user_mb.reset();
    e.audience_size.reset();
    e.continent_relevance.reset();
    e.nation_relevance.reset();
    e.spike_duration_hours.reset();
    e.likelihood.reset();
    e.semantic_signature.reset();
    e.low_confidence_fields.clear();
    e.stale_fields = {"category", "entities", "platforms", "data_per_user_mb", "audience_size",
                      "continent_relevance", "nation_relevance", "spike_duration_hours", "likelihood",
                      "semantic_signature"};
}

// Raw outputs of every ensemble attempt for one field, plus the consensus.
struct InferenceRun {
    std::string event_id;
    std::string field_name;
    std::vector<std::vector<std::optional<FieldValue>>> attempt_outputs;  // nullopt = abstain
    std::optional<FieldValue> consensus_value;                           // nullopt = FAILED
    int attempts = 0;

    bool failed() const { return !consensus_value.has_value(); }
    friend bool operator==(const InferenceRun&, const InferenceRun&) = default;
};

inline void validate(const InferenceRun& r, std::size_t ensemble_size) {
    if (r.attempts < 1) throw ValidationError("attempts", "must be >= 1");
    if (r.attempt_outputs.size() != static_cast<std::size_t>(r.attempts))
        throw ValidationError("run_outputs", "one output list per attempt");
    for (const auto& a : r.attempt_outputs)
        if (a.size() != ensemble_size) throw ValidationError("run_outputs", "length != ensemble size");
}

}  // namespace spikecast
