#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "spikecast/core/serialize.hpp"

namespace spikecast {

struct SpikeEventMatch {
    SpikeRecord spike;
    std::string event_id;
    double time_offset_minutes = 0;  // spike start minus event time
    double match_score = 0;          // in [0,1]

    friend bool operator==(const SpikeEventMatch&, const SpikeEventMatch&) = default;
};

inline void to_json(Json& j, const SpikeEventMatch& m) {
    j = Json{{"schema_version", kSchemaVersion},
             {"spike", m.spike},
             {"event_id", m.event_id},
             {"time_offset_minutes", m.time_offset_minutes},
             {"match_score", m.match_score}};
}
inline void from_json(const Json& j, SpikeEventMatch& m) {
    detail::check_schema(j);
    j.at("spike").get_to(m.spike);
    j.at("event_id").get_to(m.event_id);
    j.at("time_offset_minutes").get_to(m.time_offset_minutes);
    j.at("match_score").get_to(m.match_score);
}

struct MatchOptions {
    double window_hours = 6.0;
    // Only events mentioned before they happen can be forecast; with this set,
    // events without positive lead time never match.
    bool require_advance_notice = false;
};

inline void validate(const MatchOptions& o) {
    if (!(o.window_hours > 0)) throw ConfigError("window_hours must be > 0");
}

// Matching window of one event: [t - W, t + max(D, W)], D the event's
// expected spike duration (W when unknown).
inline std::pair<UtcTime, UtcTime> match_window(const EventAbstraction& e, double window_hours) {
    const double after = std::max(e.spike_duration_hours.value_or(window_hours), window_hours);
    return {e.event_utc.plus_seconds(-static_cast<std::int64_t>(std::llround(window_hours * 3600))),
            e.event_utc.plus_seconds(static_cast<std::int64_t>(std::llround(after * 3600)))};
}

struct MatchResult {
    std::vector<SpikeEventMatch> matches;
    std::vector<std::string> warnings;
};

// Every (spike, event) pair whose spike interval intersects the event's
// window. Per spike, matches are ranked by |offset|, then higher likelihood,
// then event id; spikes keep their input order.
inline MatchResult match_spikes_to_events(const std::vector<SpikeRecord>& spikes,
                                          const std::vector<EventAbstraction>& events,
                                          const MatchOptions& opts = {}) {
    validate(opts);
    MatchResult out;
    struct Candidate {
        const EventAbstraction* e;
        UtcTime lo, hi;
        double span_minutes;
    };
    std::vector<Candidate> cands;
    for (const auto& e : events) {
        if (!parse_iso_date(e.date)) {
            out.warnings.push_back(e.event_id + ": no derivable timestamp, excluded");
            continue;
        }
        if (opts.require_advance_notice && !(e.first_mentioned_at < e.event_utc)) continue;
        auto [lo, hi] = match_window(e, opts.window_hours);
        cands.push_back({&e, lo, hi, minutes_between(lo, hi)});
    }
    for (const auto& s : spikes) {
        std::vector<std::pair<const Candidate*, SpikeEventMatch>> hits;
        for (const auto& c : cands) {
            if (s.start > c.hi || s.end < c.lo) continue;
            const double offset = minutes_between(c.e->event_utc, s.start);
            const double score = std::clamp(1.0 - std::abs(offset) / c.span_minutes, 0.0, 1.0);
            hits.push_back({&c, SpikeEventMatch{s, c.e->event_id, offset, score}});
        }
        std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
            const double oa = std::abs(a.second.time_offset_minutes), ob = std::abs(b.second.time_offset_minutes);
            if (oa != ob) return oa < ob;
            const int la = a.first->e->likelihood.value_or(-1), lb = b.first->e->likelihood.value_or(-1);
            if (la != lb) return la > lb;
            return a.second.event_id < b.second.event_id;
        });
        for (auto& h : hits) out.matches.push_back(std::move(h.second));
    }
    return out;
}

}  // namespace spikecast
