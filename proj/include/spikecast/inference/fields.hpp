#pragma once

#include <array>
#include <string>
#include <string_view>

#include "spikecast/error.hpp"

namespace spikecast {

enum class DataType { string, string_list, integer, real, real_map, integer_0_10, integer_list };

enum class Aggregation {
    fixed_on_creation,
    plurality_string,
    votes_ge_2,
    median,
    per_entry_median,
    multilevel_clustering,  // semantic signature: computed by clustering, never by an LLM
};

struct FieldSpec {
    std::string_view field_name;
    DataType data_type;
    Aggregation aggregation;
    std::string_view prompt_template_id;  // empty when not LLM-inferred
    bool uses_rag;
};

// One row per event metadata field, in inference order.
inline constexpr std::array<FieldSpec, 13> kEventFields{{
    {"date", DataType::string, Aggregation::fixed_on_creation, "", false},
    {"time", DataType::string, Aggregation::fixed_on_creation, "", false},
    {"description", DataType::string, Aggregation::fixed_on_creation, "", false},
    {"category", DataType::string, Aggregation::plurality_string, "field_category.v1", false},
    {"entities", DataType::string_list, Aggregation::votes_ge_2, "field_entities.v1", false},
    {"platforms", DataType::string_list, Aggregation::votes_ge_2, "field_platforms.v1", true},
    {"data_per_user_mb", DataType::integer, Aggregation::median, "field_data_per_user_mb.v1", true},
    {"audience_size", DataType::integer, Aggregation::median, "field_audience_size.v1", true},
    {"continent_relevance", DataType::real_map, Aggregation::per_entry_median, "field_continent_relevance.v1", true},
    {"nation_relevance", DataType::real_map, Aggregation::per_entry_median, "field_nation_relevance.v1", true},
    {"spike_duration_hours", DataType::real, Aggregation::median, "field_spike_duration_hours.v1", true},
    {"likelihood", DataType::integer_0_10, Aggregation::median, "field_likelihood.v1", true},
    {"semantic_signature", DataType::integer_list, Aggregation::multilevel_clustering, "", false},
}};

inline const FieldSpec& field_spec(std::string_view name) {
    for (const auto& f : kEventFields)
        if (f.field_name == name) return f;
    throw ConfigError("unknown event field '" + std::string(name) + "'");
}

inline bool is_llm_inferred(const FieldSpec& f) {
    return f.aggregation != Aggregation::fixed_on_creation && f.aggregation != Aggregation::multilevel_clustering;
}

inline const char* to_string(Aggregation a) {
    switch (a) {
        case Aggregation::fixed_on_creation: return "fixed_on_creation";
        case Aggregation::plurality_string: return "plurality_string";
        case Aggregation::votes_ge_2: return "votes_ge_2";
        case Aggregation::median: return "median";
        case Aggregation::per_entry_median: return "per_entry_median";
        case Aggregation::multilevel_clustering: return "multilevel_clustering";
    }
    return "?";
}

}  // namespace spikecast
