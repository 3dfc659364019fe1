#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "spikecast/core/types.hpp"

namespace spikecast {

inline constexpr const char* kOthersCategory = "Others";
inline constexpr const char* kAllCategory = "All";
inline constexpr const char* kUnknownCategory = "Unknown";
inline constexpr int kDefaultMinCategoryCount = 1000;

struct CdfPoint {
    double lead_days;
    double fraction;  // share of the category with lead <= lead_days
    friend bool operator==(const CdfPoint&, const CdfPoint&) = default;
};

struct CategoryCdf {
    std::vector<double> leads_days;  // sorted, non-negative
    std::vector<CdfPoint> points;    // one per distinct lead
};

struct LeadTimeReport {
    std::map<std::string, CategoryCdf> categories;
    // Mentioned only after the event took place, kept out of the CDFs.
    std::map<std::string, std::vector<double>> negative_leads_days;
};

inline double lead_days(const EventAbstraction& e) {
    return static_cast<double>(e.event_utc.seconds - e.first_mentioned_at.seconds) / 86400.0;
}

inline CategoryCdf empirical_cdf(std::vector<double> leads) {
    std::sort(leads.begin(), leads.end());
    CategoryCdf c;
    const double n = static_cast<double>(leads.size());
    for (std::size_t i = 0; i < leads.size(); ++i)
        if (i + 1 == leads.size() || leads[i + 1] != leads[i])
            c.points.push_back({leads[i], static_cast<double>(i + 1) / n});
    c.leads_days = std::move(leads);
    return c;
}

// Share of a category detected at least `days` before the event.
inline double fraction_with_lead_at_least(const CategoryCdf& c, double days) {
    if (c.leads_days.empty()) return 0.0;
    auto it = std::lower_bound(c.leads_days.begin(), c.leads_days.end(), days);
    return static_cast<double>(c.leads_days.end() - it) / static_cast<double>(c.leads_days.size());
}

// Empirical CDF of lead time (event time minus first mention) per category.
// Categories with fewer than min_category_count events (negative leads
// included in the count) are pooled under "Others".
inline LeadTimeReport lead_time_cdf(const std::vector<EventAbstraction>& events, bool bucket_categories = true,
                                    int min_category_count = kDefaultMinCategoryCount) {
    std::map<std::string, std::size_t> counts;
    auto raw_category = [&](const EventAbstraction& e) -> std::string {
        if (!bucket_categories) return kAllCategory;
        return e.category && !e.category->empty() ? *e.category : kUnknownCategory;
    };
    for (const auto& e : events) ++counts[raw_category(e)];

    std::map<std::string, std::vector<double>> leads;
    LeadTimeReport r;
    for (const auto& e : events) {
        std::string cat = raw_category(e);
        if (bucket_categories && counts[cat] < static_cast<std::size_t>(std::max(min_category_count, 0)))
            cat = kOthersCategory;
        const double d = lead_days(e);
        if (d < 0) r.negative_leads_days[cat].push_back(d);
        else leads[cat].push_back(d);
    }
    for (auto& [cat, v] : leads) r.categories[cat] = empirical_cdf(std::move(v));
    for (auto& [cat, v] : r.negative_leads_days) std::sort(v.begin(), v.end());
    return r;
}

}  // namespace spikecast
