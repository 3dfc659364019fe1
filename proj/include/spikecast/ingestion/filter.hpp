#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "spikecast/ingestion/raw_post.hpp"

namespace spikecast {

struct FilterConfig {
    std::vector<std::string> search_terms;
    std::vector<std::string> communities;
    std::int64_t min_engagement = 0;
    bool require_outbound_link = false;
};

inline void validate(const FilterConfig& f) {
    if (f.search_terms.empty() && f.communities.empty())
        throw ConfigError("filter needs at least one search term or community");
    if (f.min_engagement < 0) throw ConfigError("min_engagement must be >= 0");
}

// A post passes when it matches a search term (title or body, case
// insensitive) or a listed community, reaches the engagement threshold, and
// links out if that is required.
inline bool passes_filter(const RawPost& p, const FilterConfig& f) {
    if (p.score < f.min_engagement) return false;
    if (f.require_outbound_link && p.outbound_urls.empty()) return false;
    const bool term_hit = std::any_of(f.search_terms.begin(), f.search_terms.end(), [&](const std::string& t) {
        return contains_case_insensitive(p.title, t) || contains_case_insensitive(p.body, t);
    });
    if (term_hit) return true;
    const std::string community = to_lower(p.community);
    return std::any_of(f.communities.begin(), f.communities.end(),
                       [&](const std::string& c) { return to_lower(c) == community; });
}

}  // namespace spikecast
