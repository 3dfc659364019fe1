#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spikecast/inference/aggregate.hpp"
#include "spikecast/inference/backend.hpp"
#include "spikecast/inference/events.hpp"
#include "spikecast/inference/extract.hpp"
#include "spikecast/inference/fields.hpp"
#include "spikecast/inference/parse.hpp"
#include "spikecast/inference/prompts.hpp"
#include "spikecast/inference/retrieval.hpp"
#include "spikecast/parallel.hpp"

namespace spikecast {

struct InferOptions {
    int ensemble_size = 3;
    int max_attempts = 3;
    std::size_t max_in_flight = 4;
    int backend_retries = 2;
    double temperature = 0.6;
    int max_tokens = 2048;
    std::size_t records_char_cap = 6000;  // excerpt of the source records per prompt
};

inline void validate(const InferOptions& o) {
    if (o.ensemble_size < 1) throw ConfigError("ensemble_size must be >= 1");
    if (o.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
}

inline std::string render_context(const ContextBundle& ctx) {
    if (ctx.retrieved_docs.empty()) return "(none)";
    std::string out;
    for (const auto& d : ctx.retrieved_docs) out += "## " + d.title + "\n" + d.summary + "\n\n";
    out.pop_back();
    return out;
}

// Concatenated record excerpts, cut to a shared budget.
inline std::string render_sources(const std::vector<const ContentRecord*>& records, std::size_t char_cap) {
    std::string out;
    for (const auto* r : records) {
        if (!out.empty()) out += "\n---\n";
        out += render_record(*r);
    }
    return truncate_utf8(out, char_cap);
}

inline std::string field_prompt(const EventAbstraction& event, const FieldSpec& spec, const std::string& sources,
                                const ContextBundle& context, const PromptLibrary& prompts) {
    if (!is_llm_inferred(spec)) throw PreconditionError(std::string(spec.field_name) + " is not inferred by the LLM");
    std::map<std::string, std::string> vars{{"description", event.description},
                                            {"date", event.date},
                                            {"time", event.time},
                                            {"records", sources}};
    if (spec.uses_rag) vars["context"] = render_context(context);
    return prompts.render(std::string(spec.prompt_template_id), vars);
}

// Asks for ensemble_size completions per attempt and aggregates them with the
// field's rule, trying again on consensus failure. A run whose output cannot
// be parsed, or whose backend call keeps failing, abstains. A missing stub
// fixture is a setup error and propagates.
inline InferenceRun infer_field(const EventAbstraction& event, const FieldSpec& spec, const std::string& sources,
                                const ContextBundle& context, LlmBackend& llm, const PromptLibrary& prompts,
                                const InferOptions& opts = {}) {
    validate(opts);
    if (event.description.empty() || event.date.empty() || event.time.empty())
        throw PreconditionError("event " + event.event_id + " lacks description/date/time");
    const std::string prompt = field_prompt(event, spec, sources, context, prompts);

    InferenceRun run;
    run.event_id = event.event_id;
    run.field_name = std::string(spec.field_name);
    const auto n = static_cast<std::size_t>(opts.ensemble_size);
    for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
        auto outputs = bounded_parallel_map(n, opts.max_in_flight, [&](std::size_t r) -> std::optional<FieldValue> {
            DecodingParams p{opts.temperature, opts.max_tokens, attempt * opts.ensemble_size + static_cast<int>(r)};
            std::string completion;
            try {
                completion = detail::send_with_retries(llm, prompt, p, opts.backend_retries);
            } catch (const MissingFixtureError&) {
                throw;
            } catch (const Error&) {
                return std::nullopt;
            }
            return parse_field_value(spec.data_type, completion);
        });
        run.attempts = attempt + 1;
        run.consensus_value = aggregate_runs(spec, outputs);
        run.attempt_outputs.push_back(std::move(outputs));
        if (run.consensus_value) break;
    }
    return run;
}

// Writes a consensus into the event. FAILED leaves the field unset and marks
// it low-confidence. Either way the field is no longer stale.
inline void apply_inference(EventAbstraction& e, const InferenceRun& run) {
    const std::string& f = run.field_name;
    e.stale_fields.erase(f);
    if (!run.consensus_value) {
        e.low_confidence_fields.insert(f);
        return;
    }
    e.low_confidence_fields.erase(f);
    const FieldValue& v = *run.consensus_value;
    auto as_int = [&] { return std::get<std::int64_t>(v); };
    if (f == "category") e.category = std::get<std::string>(v);
    else if (f == "entities") e.entities = std::get<StringList>(v);
    else if (f == "platforms") e.platforms = std::get<StringList>(v);
    else if (f == "data_per_user_mb") e.data_per_user_mb = as_int();
    else if (f == "audience_size") e.audience_size = as_int();
    else if (f == "continent_relevance") e.continent_relevance = std::get<RelevanceMap>(v);
    else if (f == "nation_relevance") e.nation_relevance = std::get<RelevanceMap>(v);
    else if (f == "spike_duration_hours") e.spike_duration_hours = std::get<double>(v);
    else if (f == "likelihood") e.likelihood = static_cast<int>(as_int());
    else throw PreconditionError("field " + f + " cannot be written from an inference run");
}

struct EventInference {
    std::vector<InferenceRun> runs;
    ContextBundle context;
};

// Infers every LLM field of one event, one field per prompt. Fields without
// retrieval go first so that the entities can seed the retrieval queries.
inline EventInference infer_all_fields(EventAbstraction& event, const std::string& sources, LlmBackend& llm,
                                       const RetrievalClient* retriever, const PromptLibrary& prompts,
                                       const InferOptions& opts = {}, const EnrichOptions& enrich = {}) {
    EventInference out;
    out.context.event_id = event.event_id;
    for (const auto& spec : kEventFields) {
        if (!is_llm_inferred(spec) || spec.uses_rag) continue;
        out.runs.push_back(infer_field(event, spec, sources, out.context, llm, prompts, opts));
        apply_inference(event, out.runs.back());
    }
    if (retriever) out.context = enrich_with_context(event, *retriever, enrich);
    for (const auto& spec : kEventFields) {
        if (!is_llm_inferred(spec) || !spec.uses_rag) continue;
        out.runs.push_back(infer_field(event, spec, sources, out.context, llm, prompts, opts));
        apply_inference(event, out.runs.back());
    }
    return out;
}

}  // namespace spikecast
