#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spikecast/core/text.hpp"
#include "spikecast/core/types.hpp"
#include "spikecast/inference/fields.hpp"

namespace spikecast {

// Ratio beyond which two numeric runs do not corroborate each other.
inline constexpr double kSpreadGuardRatio = 10.0;
inline constexpr std::size_t kMinVotes = 2;

namespace detail {

// Most common original spelling of a group, ties to the lexicographically
// smallest, so the choice never depends on run order.
inline std::string representative(const std::map<std::string, std::size_t>& spellings) {
    std::string best;
    std::size_t best_n = 0;
    for (const auto& [s, n] : spellings)
        if (n > best_n) best = s, best_n = n;
    return best;
}

inline double exact_median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

inline bool corroborates(double v, double m) {
    if (v == m) return true;
    if (!(v > 0) || !(m > 0) || !std::isfinite(v) || !std::isfinite(m)) return false;
    return std::max(v, m) <= kSpreadGuardRatio * std::min(v, m);
}

// Median with the spread guard: with two or more runs, at least two of them
// must lie within a factor of ten of the median.
inline std::optional<double> guarded_median(const std::vector<double>& xs) {
    if (xs.empty()) return std::nullopt;
    const double m = exact_median(xs);
    if (xs.size() == 1) return m;
    std::size_t support = 0;
    for (double v : xs) support += corroborates(v, m);
    if (support < kMinVotes) return std::nullopt;
    return m;
}

inline std::optional<double> as_number(const FieldValue& v) {
    if (auto i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (auto d = std::get_if<double>(&v)) return *d;
    return std::nullopt;
}

inline FieldValue numeric_result(DataType t, double m) {
    if (t == DataType::real) return m;
    return static_cast<std::int64_t>(std::llround(m));
}

}  // namespace detail

// Combines one attempt's ensemble outputs under the field's rule. nullopt
// entries are abstentions; a nullopt result means consensus FAILED.
inline std::optional<FieldValue> aggregate_runs(const FieldSpec& spec,
                                                const std::vector<std::optional<FieldValue>>& runs) {
    std::vector<const FieldValue*> present;
    for (const auto& r : runs)
        if (r) present.push_back(&*r);
    if (present.empty()) return std::nullopt;

    switch (spec.aggregation) {
        case Aggregation::fixed_on_creation:
        case Aggregation::multilevel_clustering:
            throw PreconditionError(std::string(spec.field_name) + " is not aggregated from LLM runs");

        case Aggregation::plurality_string: {
            std::map<std::string, std::map<std::string, std::size_t>> groups;
            for (const auto* v : present)
                if (auto s = std::get_if<std::string>(v)) {
                    std::string key = normalize_vote(*s);
                    if (!key.empty()) ++groups[key][*s];
                }
            std::size_t top = 0, top_count = 0;
            const std::map<std::string, std::size_t>* winner = nullptr;
            for (const auto& [key, spellings] : groups) {
                std::size_t n = 0;
                for (const auto& [s, c] : spellings) n += c;
                if (n > top) top = n, top_count = 1, winner = &spellings;
                else if (n == top) ++top_count;
            }
            if (!winner || top < kMinVotes || top_count != 1) return std::nullopt;
            return detail::representative(*winner);
        }

        case Aggregation::votes_ge_2: {
            std::map<std::string, std::size_t> votes;
            std::map<std::string, std::map<std::string, std::size_t>> spellings;
            for (const auto* v : present) {
                const auto* list = std::get_if<StringList>(v);
                if (!list) continue;
                std::set<std::string> seen;
                for (const auto& item : *list) {
                    std::string key = normalize_vote(item);
                    if (key.empty() || !seen.insert(key).second) continue;
                    ++votes[key];
                    ++spellings[key][item];
                }
            }
            StringList out;
            for (const auto& [key, n] : votes)
                if (n >= kMinVotes) out.push_back(detail::representative(spellings[key]));
            return out;
        }

        case Aggregation::median: {
            std::vector<double> xs;
            for (const auto* v : present)
                if (auto x = detail::as_number(*v)) xs.push_back(*x);
            auto m = detail::guarded_median(xs);
            if (!m) return std::nullopt;
            return detail::numeric_result(spec.data_type, *m);
        }

        case Aggregation::per_entry_median: {
            std::map<std::string, std::vector<double>> per_key;
            std::size_t maps = 0;
            for (const auto* v : present)
                if (auto m = std::get_if<RelevanceMap>(v)) {
                    ++maps;
                    for (const auto& [k, x] : *m) per_key[k].push_back(x);
                }
            if (maps == 0) return std::nullopt;
            RelevanceMap out;
            for (const auto& [k, xs] : per_key) {
                if (xs.size() < kMinVotes) continue;
                auto m = detail::guarded_median(xs);
                if (!m) return std::nullopt;
                out[k] = *m;
            }
            return out;
        }
    }
    return std::nullopt;
}

}  // namespace spikecast
