#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "spikecast/baseline/baseline.hpp"

namespace spikecast {

struct SpikeDetectConfig {
    double z_threshold = 2.0;
    double min_duration_minutes = 20.0;
    double merge_gap_minutes = 5.0;
};

inline void validate(const SpikeDetectConfig& c) {
    if (!(c.z_threshold > 0)) throw ConfigError("z_threshold must be > 0");
    if (!(c.min_duration_minutes > 0)) throw ConfigError("min_duration_minutes must be > 0");
    if (!(c.merge_gap_minutes >= 0)) throw ConfigError("merge_gap_minutes must be >= 0");
}

// Maximal runs of z >= threshold, with runs whose sub-threshold gap is
// shorter than merge_gap joined. A missing (NaN) sample always ends a run.
// Spikes shorter than min_duration are dropped. peak_z and mean_z are taken
// over the above-threshold samples only.
inline std::vector<SpikeRecord> detect_spikes(const ZSeries& z, const SpikeDetectConfig& cfg = {}) {
    validate(cfg);
    if (z.step_seconds <= 0) throw ConfigError("z-series step must be > 0");
    const double step_minutes = static_cast<double>(z.step_seconds) / 60.0;

    std::vector<SpikeRecord> out;
    bool open = false;
    std::size_t first = 0, last = 0, count = 0;
    double sum = 0, peak = 0;

    auto close = [&] {
        if (!open) return;
        open = false;
        SpikeRecord s;
        s.network_id = z.network_id;
        s.start = z.time_at(first);
        s.end = z.time_at(last + 1);
        s.duration_minutes = minutes_between(s.start, s.end);
        s.peak_z = peak;
        s.mean_z = sum / static_cast<double>(count);
        if (s.duration_minutes >= cfg.min_duration_minutes) out.push_back(s);
    };

    for (std::size_t i = 0; i < z.z_values.size(); ++i) {
        const double v = z.z_values[i];
        if (std::isnan(v)) {
            close();
            continue;
        }
        if (!std::isfinite(v)) throw PreconditionError("z-series contains infinite values");
        if (v < cfg.z_threshold) continue;
        if (open) {
            const std::size_t gap = i - last - 1;
            if (gap != 0 && static_cast<double>(gap) * step_minutes >= cfg.merge_gap_minutes) close();
        }
        if (!open) {
            open = true;
            first = i;
            count = 0;
            sum = 0;
            peak = v;
        }
        last = i;
        ++count;
        sum += v;
        peak = std::max(peak, v);
    }
    close();
    return out;
}

// Count of spikes whose peak reaches each threshold.
inline std::vector<std::pair<double, std::size_t>> spike_frequency(const std::vector<SpikeRecord>& spikes,
                                                                   const std::vector<double>& z_bins) {
    if (z_bins.empty()) throw ConfigError("z_bins must not be empty");
    for (std::size_t i = 1; i < z_bins.size(); ++i)
        if (!(z_bins[i] > z_bins[i - 1])) throw ConfigError("z_bins must be strictly increasing");
    std::vector<double> peaks;
    peaks.reserve(spikes.size());
    for (const auto& s : spikes) peaks.push_back(s.peak_z);
    std::sort(peaks.begin(), peaks.end());
    std::vector<std::pair<double, std::size_t>> hist;
    for (double b : z_bins) {
        auto it = std::lower_bound(peaks.begin(), peaks.end(), b);
        hist.emplace_back(b, static_cast<std::size_t>(peaks.end() - it));
    }
    return hist;
}

}  // namespace spikecast
