#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "spikecast/correlation/match.hpp"

namespace spikecast {

struct LabeledSpike {
    SpikeRecord spike;
    bool event_driven = false;
};

struct NetworkCoverage {
    std::size_t labeled = 0;  // event-driven spikes
    std::size_t matched = 0;
    double fraction() const { return labeled ? static_cast<double>(matched) / static_cast<double>(labeled) : 0.0; }
};

struct CoverageReport {
    std::map<std::string, NetworkCoverage> per_network;
    NetworkCoverage overall;
    std::vector<std::string> notes;
};

// A spike is identified by its network and interval.
inline bool same_spike(const SpikeRecord& a, const SpikeRecord& b) {
    return a.network_id == b.network_id && a.start == b.start && a.end == b.end;
}

// Share of event-driven spikes with at least one match, per network and
// overall. Networks with no event-driven spike are left out with a note.
inline CoverageReport coverage(const std::vector<LabeledSpike>& labeled, const std::vector<SpikeEventMatch>& matches) {
    std::set<std::tuple<std::string, std::int64_t, std::int64_t>> hit;
    for (const auto& m : matches) hit.emplace(m.spike.network_id, m.spike.start.seconds, m.spike.end.seconds);
    CoverageReport r;
    std::set<std::string> networks;
    for (const auto& l : labeled) {
        networks.insert(l.spike.network_id);
        if (!l.event_driven) continue;
        auto& nc = r.per_network[l.spike.network_id];
        const bool m = hit.count({l.spike.network_id, l.spike.start.seconds, l.spike.end.seconds}) > 0;
        ++nc.labeled;
        ++r.overall.labeled;
        nc.matched += m;
        r.overall.matched += m;
    }
    for (const auto& n : networks)
        if (!r.per_network.count(n)) r.notes.push_back(n + ": no event-driven spikes labelled, omitted");
    return r;
}

}  // namespace spikecast
