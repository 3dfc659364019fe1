#pragma once

#include <json.hpp>

#include "spikecast/core/types.hpp"

namespace spikecast {

using Json = nlohmann::json;

inline Json field_value_to_json(const FieldValue& v) {
    Json j;
    std::visit([&j](const auto& x) { j = x; }, v);
    return j;
}

inline FieldValue field_value_from_json(const Json& j);

}  // namespace spikecast

// FieldValue is a std::variant, so ADL cannot find spikecast's hooks.
template <>
struct nlohmann::adl_serializer<spikecast::FieldValue> {
    static void to_json(json& j, const spikecast::FieldValue& v) { j = spikecast::field_value_to_json(v); }
    static void from_json(const json& j, spikecast::FieldValue& v) { v = spikecast::field_value_from_json(j); }
};

namespace spikecast {


inline constexpr int kSchemaVersion = 1;

inline void to_json(Json& j, UtcTime t) { j = format_utc(t); }
inline void from_json(const Json& j, UtcTime& t) { t = parse_utc_or_throw(j.get<std::string>(), "timestamp"); }

namespace detail {

template <typename T>
void get_opt(const Json& j, const char* key, std::optional<T>& out) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        out.reset();
        return;
    }
    out = it->get<T>();
}

template <typename T>
void put_opt(Json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
    else j[key] = nullptr;
}

inline void check_schema(const Json& j) {
    auto it = j.find("schema_version");
    if (it == j.end()) throw ValidationError("schema_version", "missing");
    if (it->get<int>() != kSchemaVersion)
        throw ValidationError("schema_version", "unsupported version " + it->dump());
}

}  // namespace detail

inline const char* to_string(SourceKind k) {
    switch (k) {
        case SourceKind::forum_thread: return "forum_thread";
        case SourceKind::linked_page: return "linked_page";
        case SourceKind::wiki_article: return "wiki_article";
    }
    return "forum_thread";
}

inline SourceKind source_kind_from(const std::string& s) {
    if (s == "forum_thread") return SourceKind::forum_thread;
    if (s == "linked_page") return SourceKind::linked_page;
    if (s == "wiki_article") return SourceKind::wiki_article;
    throw ValidationError("source", "unknown source kind '" + s + "'");
}

inline FieldValue field_value_from_json(const Json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_array()) return j.get<StringList>();
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number()) return j.get<double>();
    if (j.is_object()) return j.get<RelevanceMap>();
    throw ValidationError("value", "unsupported JSON type for a field value");
}

inline void to_json(Json& j, const SpikeRecord& s) {
    j = Json{{"schema_version", kSchemaVersion},
             {"spike_id", s.spike_id},
             {"network_id", s.network_id},
             {"start", s.start},
             {"end", s.end},
             {"peak_z", s.peak_z},
             {"mean_z", s.mean_z},
             {"duration_minutes", s.duration_minutes}};
}

inline void from_json(const Json& j, SpikeRecord& s) {
    detail::check_schema(j);
    s.spike_id = j.value("spike_id", "");
    j.at("network_id").get_to(s.network_id);
    j.at("start").get_to(s.start);
    j.at("end").get_to(s.end);
    j.at("peak_z").get_to(s.peak_z);
    j.at("mean_z").get_to(s.mean_z);
    j.at("duration_minutes").get_to(s.duration_minutes);
}

inline void to_json(Json& j, const LinkedText& l) { j = Json{{"url", l.url}, {"text", l.text}}; }
inline void from_json(const Json& j, LinkedText& l) {
    j.at("url").get_to(l.url);
    j.at("text").get_to(l.text);
}

inline void to_json(Json& j, const ContentRecord& r) {
    j = Json{{"schema_version", kSchemaVersion},
             {"record_id", r.record_id},
             {"source", to_string(r.source)},
             {"url", r.url},
             {"created_at", r.created_at},
             {"fetched_at", r.fetched_at},
             {"title", r.title},
             {"body_text", r.body_text},
             {"comments", r.comments},
             {"engagement", r.engagement},
             {"linked_texts", r.linked_texts}};
}

inline void from_json(const Json& j, ContentRecord& r) {
    detail::check_schema(j);
    j.at("record_id").get_to(r.record_id);
    r.source = source_kind_from(j.at("source").get<std::string>());
    j.at("url").get_to(r.url);
    j.at("created_at").get_to(r.created_at);
    j.at("fetched_at").get_to(r.fetched_at);
    j.at("title").get_to(r.title);
    j.at("body_text").get_to(r.body_text);
    j.at("comments").get_to(r.comments);
    j.at("engagement").get_to(r.engagement);
    j.at("linked_texts").get_to(r.linked_texts);
}

inline void to_json(Json& j, const EventDraft& d) {
    j = Json{{"schema_version", kSchemaVersion}, {"headline", d.headline},
             {"date", d.date},                   {"time", d.time},
             {"source_record", d.source_record}, {"past_reference", d.past_reference}};
}

inline void from_json(const Json& j, EventDraft& d) {
    detail::check_schema(j);
    j.at("headline").get_to(d.headline);
    j.at("date").get_to(d.date);
    j.at("time").get_to(d.time);
    j.at("source_record").get_to(d.source_record);
    d.past_reference = j.value("past_reference", false);
}

inline void to_json(Json& j, const SemanticSignature& s) {
    j = Json{{"levels", s.levels}, {"cluster_ids", s.cluster_ids}};
}
inline void from_json(const Json& j, SemanticSignature& s) {
    j.at("levels").get_to(s.levels);
    j.at("cluster_ids").get_to(s.cluster_ids);
}

inline void to_json(Json& j, const EventAbstraction& e) {
    j = Json{{"schema_version", kSchemaVersion},
             {"event_id", e.event_id},
             {"date", e.date},
             {"time", e.time},
             {"description", e.description},
             {"event_utc", e.event_utc},
             {"source_records", e.source_records},
             {"first_mentioned_at", e.first_mentioned_at},
             {"merge_history", e.merge_history},
             {"low_confidence_fields", e.low_confidence_fields},
             {"stale_fields", e.stale_fields}};
    detail::put_opt(j, "category", e.category);
    detail::put_opt(j, "entities", e.entities);
    detail::put_opt(j, "platforms", e.platforms);
    detail::put_opt(j, "data_per_user_mb", e.data_per_user_mb);
    detail::put_opt(j, "audience_size", e.audience_size);
    detail::put_opt(j, "continent_relevance", e.continent_relevance);
    detail::put_opt(j, "nation_relevance", e.nation_relevance);
    detail::put_opt(j, "spike_duration_hours", e.spike_duration_hours);
    detail::put_opt(j, "likelihood", e.likelihood);
    detail::put_opt(j, "semantic_signature", e.semantic_signature);
}

inline void from_json(const Json& j, EventAbstraction& e) {
    detail::check_schema(j);
    j.at("event_id").get_to(e.event_id);
    j.at("date").get_to(e.date);
    j.at("time").get_to(e.time);
    j.at("description").get_to(e.description);
    j.at("event_utc").get_to(e.event_utc);
    j.at("source_records").get_to(e.source_records);
    j.at("first_mentioned_at").get_to(e.first_mentioned_at);
    e.merge_history = j.value("merge_history", std::vector<std::string>{});
    e.low_confidence_fields = j.value("low_confidence_fields", std::set<std::string>{});
    e.stale_fields = j.value("stale_fields", std::set<std::string>{});
    detail::get_opt(j, "category", e.category);
    detail::get_opt(j, "entities", e.entities);
    detail::get_opt(j, "platforms", e.platforms);
    detail::get_opt(j, "data_per_user_mb", e.data_per_user_mb);
    detail::get_opt(j, "audience_size", e.audience_size);
    detail::get_opt(j, "continent_relevance", e.continent_relevance);
    detail::get_opt(j, "nation_relevance", e.nation_relevance);
    detail::get_opt(j, "spike_duration_hours", e.spike_duration_hours);
    detail::get_opt(j, "likelihood", e.likelihood);
    detail::get_opt(j, "semantic_signature", e.semantic_signature);
}

inline void to_json(Json& j, const InferenceRun& r) {
    Json attempts = Json::array();
    for (const auto& a : r.attempt_outputs) {
        Json runs = Json::array();
        for (const auto& v : a) runs.push_back(v ? Json(*v) : Json(nullptr));
        attempts.push_back(std::move(runs));
    }
    j = Json{{"schema_version", kSchemaVersion},
             {"event_id", r.event_id},
             {"field_name", r.field_name},
             {"run_outputs", std::move(attempts)},
             {"attempts", r.attempts}};
    if (r.consensus_value) j["consensus_value"] = *r.consensus_value;
    else j["consensus_value"] = "FAILED";
    j["failed"] = r.failed();
}

inline void from_json(const Json& j, InferenceRun& r) {
    detail::check_schema(j);
    j.at("event_id").get_to(r.event_id);
    j.at("field_name").get_to(r.field_name);
    j.at("attempts").get_to(r.attempts);
    r.attempt_outputs.clear();
    for (const auto& a : j.at("run_outputs")) {
        std::vector<std::optional<FieldValue>> runs;
        for (const auto& v : a) {
            if (v.is_null()) runs.emplace_back(std::nullopt);
            else runs.emplace_back(v.get<FieldValue>());
        }
        r.attempt_outputs.push_back(std::move(runs));
    }
    if (j.value("failed", false)) r.consensus_value.reset();
    else r.consensus_value = j.at("consensus_value").get<FieldValue>();
}

}  // namespace spikecast
