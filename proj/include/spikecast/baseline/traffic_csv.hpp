#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "spikecast/core/text.hpp"
#include "spikecast/core/types.hpp"

namespace spikecast {

inline constexpr const char* kTrafficCsvHeader = "timestamp_utc,network_id,bits_per_second";

// Parses `timestamp_utc,network_id,bits_per_second`. Rows may interleave
// networks. Each network's step is the smallest gap between its timestamps;
// absent timestamps become missing (NaN) samples.
inline std::map<std::string, TrafficSeries> parse_traffic_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("traffic_csv", "empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTrafficCsvHeader)
        throw ValidationError("traffic_csv", std::string("expected header '") + kTrafficCsvHeader + "'");

    std::map<std::string, std::map<std::int64_t, double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cols = split(line, ',');
        const std::string where = "traffic_csv line " + std::to_string(lineno);
        if (cols.size() != 3) throw ValidationError(where, "expected 3 columns");
        auto t = parse_utc(cols[0]);
        if (!t) throw ValidationError(where, "bad timestamp '" + cols[0] + "'");
        double v = 0;
        try {
            std::size_t used = 0;
            v = std::stod(cols[2], &used);
            if (used != cols[2].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ValidationError(where, "bad bits_per_second '" + cols[2] + "'");
        }
        if (!std::isfinite(v) || v < 0) throw ValidationError(where, "bits_per_second must be finite and >= 0");
        if (!rows[cols[1]].emplace(t->seconds, v).second)
            throw ValidationError(where, "duplicate timestamp for " + cols[1]);
    }

    std::map<std::string, TrafficSeries> out;
    for (const auto& [net, samples] : rows) {
        std::int64_t step = std::numeric_limits<std::int64_t>::max();
        for (auto it = std::next(samples.begin()); it != samples.end(); ++it)
            step = std::min(step, it->first - std::prev(it)->first);
        if (samples.size() == 1) step = 60;
        const std::int64_t t0 = samples.begin()->first;
        const std::int64_t t1 = samples.rbegin()->first;
        TrafficSeries s{net, UtcTime{t0}, step, {}};
        s.values.assign(static_cast<std::size_t>((t1 - t0) / step + 1), std::numeric_limits<double>::quiet_NaN());
        for (const auto& [t, v] : samples) {
            if ((t - t0) % step != 0)
                throw ValidationError("traffic_csv", "network " + net + " is not uniformly sampled");
            s.values[static_cast<std::size_t>((t - t0) / step)] = v;
        }
        out.emplace(net, std::move(s));
    }
    return out;
}

inline std::map<std::string, TrafficSeries> read_traffic_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return parse_traffic_csv(in);
}

inline void write_traffic_csv(const std::filesystem::path& path, const std::vector<TrafficSeries>& series) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << kTrafficCsvHeader << '\n';
    char buf[64];
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (is_missing(s.values[i])) continue;
            std::snprintf(buf, sizeof buf, "%.3f", s.values[i]);
            out << format_utc(s.time_at(i)) << ',' << s.network_id << ',' << buf << '\n';
        }
}

}  // namespace spikecast
