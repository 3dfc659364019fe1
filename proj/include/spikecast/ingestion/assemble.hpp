#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "spikecast/ingestion/clean.hpp"
#include "spikecast/ingestion/fetch.hpp"

namespace spikecast {

struct AssembleOptions {
    std::size_t top_k_comments = 20;
    std::size_t comment_max_chars = 2000;
    std::size_t record_max_chars = 60000;
};

struct AssembleResult {
    std::optional<ContentRecord> record;
    std::string discard_reason;  // set when record is empty
};

inline std::string record_id_for(const RawPost& post) { return "rec-" + post.post_id; }

// Cleans the post body, its top-scoring top-level comments and the linked
// pages into one ContentRecord. Text beyond the record budget is dropped
// from the tail: linked pages first, then comments, then the body.
inline AssembleResult assemble_content_record(const RawPost& post, const std::vector<FetchedPage>& pages,
                                              const AssembleOptions& opts = {}) {
    ContentRecord r;
    r.record_id = record_id_for(post);
    r.source = SourceKind::forum_thread;
    r.url = permalink(post);
    r.created_at = post.created_at;
    r.fetched_at = post.fetched_at ? std::max(*post.fetched_at, post.created_at) : post.created_at;
    r.title = clean_text(post.title, TextFormat::plain, 1000);
    r.engagement = std::max<std::int64_t>(0, post.score);

    std::size_t budget = opts.record_max_chars;
    auto take = [&budget](std::string text) {
        text = truncate_utf8(std::move(text), budget);
        while (!text.empty() && is_space(text.back())) text.pop_back();
        budget -= text.size();
        return text;
    };
    budget -= std::min(budget, r.title.size());
    r.body_text = take(clean_text(post.body, TextFormat::markdown, opts.record_max_chars));

    std::vector<std::size_t> order(post.comments_raw.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return post.comments_raw[a].score > post.comments_raw[b].score;
    });
    for (std::size_t idx : order) {
        if (r.comments.size() >= opts.top_k_comments || budget == 0) break;
        std::string c = take(clean_text(post.comments_raw[idx].body, TextFormat::markdown, opts.comment_max_chars));
        if (!c.empty()) r.comments.push_back(std::move(c));
    }
    for (const auto& page : pages) {
        if (budget == 0) break;
        std::string text = take(clean_text(page.raw_html, TextFormat::html, opts.record_max_chars));
        if (!text.empty()) r.linked_texts.push_back({page.url, std::move(text)});
    }

    if (!has_content(r)) return {std::nullopt, "post " + post.post_id + ": no text after cleaning"};
    return {std::move(r), {}};
}

}  // namespace spikecast
