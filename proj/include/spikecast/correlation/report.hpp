#pragma once

#include <string>
#include <vector>

#include "spikecast/core/csv.hpp"
#include "spikecast/core/serialize.hpp"
#include "spikecast/correlation/coverage.hpp"
#include "spikecast/correlation/lead_time.hpp"

namespace spikecast {

enum class ReportFormat { csv, json };

inline ReportFormat parse_report_format(const std::string& s) {
    if (s == "csv") return ReportFormat::csv;
    if (s == "json") return ReportFormat::json;
    throw ConfigError("unknown report format '" + s + "' (csv|json)");
}

inline std::string coverage_report(const CoverageReport& r, ReportFormat f) {
    if (f == ReportFormat::json) {
        Json nets = Json::array();
        for (const auto& [n, c] : r.per_network)
            nets.push_back(Json{{"network_id", n}, {"labeled", c.labeled}, {"matched", c.matched}, {"coverage", c.fraction()}});
        return Json{{"networks", nets},
                    {"overall", Json{{"labeled", r.overall.labeled},
                                     {"matched", r.overall.matched},
                                     {"coverage", r.overall.fraction()}}},
                    {"notes", r.notes}}
                   .dump(2) +
               "\n";
    }
    std::string out = csv_line({"network_id", "labeled", "matched", "coverage"});
    for (const auto& [n, c] : r.per_network)
        out += csv_line({n, std::to_string(c.labeled), std::to_string(c.matched), format_real(c.fraction())});
    out += csv_line({"ALL", std::to_string(r.overall.labeled), std::to_string(r.overall.matched),
                     format_real(r.overall.fraction())});
    return out;
}

inline std::string lead_time_report(const LeadTimeReport& r, ReportFormat f) {
    if (f == ReportFormat::json) {
        Json cats = Json::object();
        for (const auto& [cat, cdf] : r.categories) {
            Json pts = Json::array();
            for (const auto& p : cdf.points) pts.push_back(Json{{"lead_days", p.lead_days}, {"fraction", p.fraction}});
            cats[cat] = Json{{"count", cdf.leads_days.size()}, {"points", pts}};
        }
        return Json{{"categories", cats}, {"negative_leads_days", r.negative_leads_days}}.dump(2) + "\n";
    }
    std::string out = csv_line({"category", "lead_days", "cumulative_fraction"});
    for (const auto& [cat, cdf] : r.categories)
        for (const auto& p : cdf.points) out += csv_line({cat, format_real(p.lead_days), format_real(p.fraction)});
    // Post-event mentions, one row each, fraction left empty.
    for (const auto& [cat, v] : r.negative_leads_days)
        for (double d : v) out += csv_line({cat + " (negative)", format_real(d), ""});
    return out;
}

inline std::string spike_frequency_report(const std::vector<std::pair<double, std::size_t>>& hist, ReportFormat f) {
    if (f == ReportFormat::json) {
        Json rows = Json::array();
        for (const auto& [z, n] : hist) rows.push_back(Json{{"z_threshold", z}, {"count", n}});
        return Json{{"spike_frequency", rows}}.dump(2) + "\n";
    }
    std::string out = csv_line({"z_threshold", "count"});
    for (const auto& [z, n] : hist) out += csv_line({format_real(z), std::to_string(n)});
    return out;
}

}  // namespace spikecast
