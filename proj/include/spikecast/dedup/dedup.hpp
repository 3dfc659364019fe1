#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "spikecast/core/store.hpp"
#include "spikecast/dedup/embed.hpp"

namespace spikecast {

inline constexpr double kDefaultDuplicateThreshold = 0.90;

inline double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw PreconditionError("cosine of vectors with dimensions " + std::to_string(a.size()) + " and " +
                                std::to_string(b.size()));
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw PreconditionError("cosine of a zero-norm vector");
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

namespace detail {

struct DisjointSets {
    std::vector<std::size_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a), b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace detail

// Connected components of the same-date similarity graph; only components of
// two or more events. Events without an embedding are ignored. Groups list
// ids in input order; groups are ordered by their first member.
inline std::vector<std::vector<std::string>> find_duplicates(const std::vector<EventAbstraction>& events,
                                                             const std::vector<EventEmbedding>& embeddings,
                                                             double sim_threshold = kDefaultDuplicateThreshold) {
    std::map<std::string, const EventEmbedding*> by_id;
    std::size_t dim = 0;
    for (const auto& e : embeddings) {
        if (dim && e.vector.size() != dim) throw PreconditionError("mixed embedding dimensions");
        dim = e.vector.size();
        by_id[e.event_id] = &e;
    }
    std::vector<std::size_t> idx;  // events with embeddings
    for (std::size_t i = 0; i < events.size(); ++i)
        if (by_id.count(events[i].event_id)) idx.push_back(i);

    std::map<std::string, std::vector<std::size_t>> by_date;
    for (std::size_t k = 0; k < idx.size(); ++k) by_date[events[idx[k]].date].push_back(k);

    detail::DisjointSets sets(idx.size());
    for (const auto& [date, members] : by_date)
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = a + 1; b < members.size(); ++b) {
                const auto& ea = *by_id.at(events[idx[members[a]]].event_id);
                const auto& eb = *by_id.at(events[idx[members[b]]].event_id);
                if (cosine_similarity(ea.vector, eb.vector) >= sim_threshold) sets.unite(members[a], members[b]);
            }

    std::map<std::size_t, std::vector<std::string>> comps;
    for (std::size_t k = 0; k < idx.size(); ++k) comps[sets.find(k)].push_back(events[idx[k]].event_id);
    std::vector<std::vector<std::string>> groups;
    for (auto& [root, ids] : comps)
        if (ids.size() >= 2) groups.push_back(std::move(ids));
    return groups;
}

// Folds a duplicate group into its earliest-mentioned member (ties: first
// listed). The survivor gains every source record and the absorbed ids; its
// inferred fields are cleared and marked stale for re-inference. The store
// write is all-or-nothing.
inline EventAbstraction merge_events(const std::vector<std::string>& group, EventStore& store) {
    if (group.size() < 2) throw PreconditionError("a merge needs at least two events");
    std::vector<EventAbstraction> members;
    for (const auto& id : group) {
        auto e = store.find(id);
        if (!e) throw PreconditionError("event " + id + " is not live");
        members.push_back(std::move(*e));
    }
    for (const auto& m : members)
        if (m.date != members[0].date) throw PreconditionError("merge group spans several dates");

    std::size_t s = 0;
    for (std::size_t i = 1; i < members.size(); ++i)
        if (members[i].first_mentioned_at < members[s].first_mentioned_at) s = i;
    EventAbstraction survivor = members[s];
    std::vector<std::string> absorbed;
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (i == s) continue;
        absorbed.push_back(members[i].event_id);
        survivor.merge_history.push_back(members[i].event_id);
        for (const auto& h : members[i].merge_history) survivor.merge_history.push_back(h);
        for (const auto& r : members[i].source_records)
            if (std::find(survivor.source_records.begin(), survivor.source_records.end(), r) ==
                survivor.source_records.end())
                survivor.source_records.push_back(r);
    }
    mark_stale(survivor);
    store.commit_merge(survivor, absorbed);
    return survivor;
}

struct DedupReport {
    std::vector<std::vector<std::string>> groups;
    std::vector<std::string> survivors;
    std::size_t absorbed = 0;
};

// One pass: find every duplicate group among the live events and merge each.
inline DedupReport dedup_pass(EventStore& store, const std::vector<EventEmbedding>& embeddings,
                              double sim_threshold = kDefaultDuplicateThreshold) {
    DedupReport report;
    report.groups = find_duplicates(store.current(), embeddings, sim_threshold);
    for (const auto& g : report.groups) {
        report.survivors.push_back(merge_events(g, store).event_id);
        report.absorbed += g.size() - 1;
    }
    return report;
}

}  // namespace spikecast
