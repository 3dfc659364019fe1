#pragma once

#include <string>
#include <vector>

#include "spikecast/core/types.hpp"
#include "spikecast/inference/backend.hpp"
#include "spikecast/inference/parse.hpp"
#include "spikecast/inference/prompts.hpp"

namespace spikecast {

inline constexpr const char* kExtractPrompt = "extract_events.v1";
inline constexpr const char* kExtractReminderPrompt = "extract_events_reminder.v1";

// Plain-text view of a record as the model sees it.
inline std::string render_record(const ContentRecord& r) {
    std::string out;
    if (!r.title.empty()) out += "Title: " + r.title + "\n";
    if (!r.url.empty()) out += "URL: " + r.url + "\n";
    if (!r.body_text.empty()) out += "\n" + r.body_text + "\n";
    if (!r.comments.empty()) {
        out += "\nTop comments:\n";
        for (const auto& c : r.comments) out += "- " + c + "\n";
    }
    for (const auto& lt : r.linked_texts) out += "\nLinked page " + lt.url + ":\n" + lt.text + "\n";
    return out;
}

struct ExtractOptions {
    int max_retries = 2;  // extra tries after a retryable backend failure
    double temperature = 0.6;
    int max_tokens = 2048;
};

struct ExtractResult {
    std::vector<EventDraft> drafts;
    std::vector<std::string> diagnostics;  // rejected items, re-prompts
};

namespace detail {

template <typename Backend>
std::string send_with_retries(Backend& llm, const std::string& prompt, const DecodingParams& params,
                              int max_retries) {
    for (int attempt = 0;; ++attempt) {
        try {
            return llm.send(prompt, params);
        } catch (const Error& e) {
            if (!e.retryable() || attempt >= max_retries) throw;
        }
    }
}

inline std::optional<Json> event_list(std::string_view completion) {
    auto doc = extract_json(completion);
    if (!doc) return std::nullopt;
    if (doc->is_array()) return doc;
    if (doc->is_object() && doc->contains("events") && (*doc)["events"].is_array()) return (*doc)["events"];
    return std::nullopt;
}

}  // namespace detail

inline std::string extraction_prompt(const ContentRecord& record, const PromptLibrary& prompts) {
    return prompts.render(kExtractPrompt, {{"posted_at", format_utc(record.created_at)},
                                           {"record", render_record(record)}});
}

// Every upcoming event a record mentions, one draft each. Backend failures
// that survive the retries propagate; output that cannot be parsed earns one
// re-prompt with a format reminder before the record fails.
inline ExtractResult extract_events(const ContentRecord& record, LlmBackend& llm, const PromptLibrary& prompts,
                                    const ExtractOptions& opts = {}) {
    if (!has_content(record)) throw PreconditionError("record " + record.record_id + " has no content");
    const DecodingParams params{opts.temperature, opts.max_tokens, 0};
    ExtractResult result;

    const std::string prompt = extraction_prompt(record, prompts);
    auto items = detail::event_list(detail::send_with_retries(llm, prompt, params, opts.max_retries));
    if (!items) {
        result.diagnostics.push_back("unparseable extraction output; re-prompting");
        const std::string reminder = prompts.render(kExtractReminderPrompt, {{"original_prompt", prompt}});
        items = detail::event_list(detail::send_with_retries(llm, reminder, params, opts.max_retries));
        if (!items) throw BackendError("extraction output for " + record.record_id + " unparseable after re-prompt", false);
    }

    const auto posted = civil_date_of(record.created_at);
    for (const auto& item : *items) {
        EventDraft d;
        d.source_record = record.record_id;
        if (item.is_object()) {
            if (item.contains("headline") && item["headline"].is_string())
                d.headline = collapse_whitespace(item["headline"].get<std::string>());
            if (item.contains("date") && item["date"].is_string()) d.date = item["date"].get<std::string>();
            d.time = kUnknownTime;
            if (item.contains("time") && item["time"].is_string()) {
                std::string t = collapse_whitespace(item["time"].get<std::string>());
                if (!t.empty() && to_lower(t) != kUnknownTime) d.time = t;
            }
        }
        try {
            validate(d);
        } catch (const ValidationError& e) {
            result.diagnostics.push_back(std::string("dropped draft: ") + e.what());
            continue;
        }
        d.past_reference = *parse_iso_date(d.date) < posted;
        result.drafts.push_back(std::move(d));
    }
    return result;
}

}  // namespace spikecast
