#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spikecast/core/types.hpp"

namespace spikecast {

struct BinStats {
    double mean = 0;
    double std = 0;  // population standard deviation
    std::size_t count = 0;
};

// Per-(weekday, time-of-day bin) statistics of one network's traffic.
struct BaselineModel {
    std::string network_id;
    int bin_minutes = 5;
    int window_weeks = 4;
    std::vector<std::optional<BinStats>> stats;  // index = weekday * bins_per_day + bin

    int bins_per_day() const { return 1440 / bin_minutes; }

    std::size_t slot_index(int weekday, int bin) const {
        return static_cast<std::size_t>(weekday * bins_per_day() + bin);
    }

    int bin_of(UtcTime t) const { return static_cast<int>(seconds_of_day(t) / (60 * bin_minutes)); }

    const std::optional<BinStats>& at(int weekday, int bin) const { return stats[slot_index(weekday, bin)]; }
    const std::optional<BinStats>& at(UtcTime t) const { return at(weekday_of(t), bin_of(t)); }
};

struct ZSeries {
    std::string network_id;
    UtcTime start;
    std::int64_t step_seconds = 60;
    std::vector<double> z_values;  // NaN where the input sample was missing or unscored

    UtcTime time_at(std::size_t i) const {
        return start.plus_seconds(static_cast<std::int64_t>(i) * step_seconds);
    }
};

inline constexpr double kStdFloorAbs = 1e-6;
inline constexpr double kDefaultStdFloorFraction = 0.05;

// Monday 1970-01-05 00:00 UTC anchors week numbering.
inline std::int64_t week_index(UtcTime t) {
    constexpr std::int64_t anchor = 4 * kSecondsPerDay;
    std::int64_t d = t.seconds - anchor;
    return d >= 0 ? d / kSecondsPerWeek : -((-d + kSecondsPerWeek - 1) / kSecondsPerWeek);
}

inline void check_bin_minutes(int bin_minutes) {
    if (bin_minutes <= 0 || 1440 % bin_minutes != 0)
        throw ConfigError("bin_minutes must be positive and divide 1440, got " + std::to_string(bin_minutes));
}

// Mean/std per (weekday, bin) over the trailing `window_weeks` occurrences
// of each slot. Missing samples are skipped; slots without data stay empty.
inline BaselineModel fit_baseline(const TrafficSeries& series, int window_weeks = 4, int bin_minutes = 5) {
    validate(series);
    check_bin_minutes(bin_minutes);
    if (window_weeks < 1) throw ConfigError("window_weeks must be >= 1");
    if (static_cast<std::int64_t>(series.size()) * series.step_seconds < kSecondsPerWeek)
        throw PreconditionError("insufficient seasonality data: series " + series.network_id +
                                " spans less than one week");

    BaselineModel model;
    model.network_id = series.network_id;
    model.bin_minutes = bin_minutes;
    model.window_weeks = window_weeks;
    model.stats.assign(static_cast<std::size_t>(7 * model.bins_per_day()), std::nullopt);

    // slot -> week -> samples
    std::vector<std::map<std::int64_t, std::vector<double>>> by_slot(model.stats.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        double v = series.values[i];
        if (is_missing(v)) continue;
        UtcTime t = series.time_at(i);
        by_slot[model.slot_index(weekday_of(t), model.bin_of(t))][week_index(t)].push_back(v);
    }

    for (std::size_t s = 0; s < by_slot.size(); ++s) {
        const auto& weeks = by_slot[s];
        if (weeks.empty()) continue;
        double sum = 0;
        std::size_t n = 0;
        int taken = 0;
        for (auto it = weeks.rbegin(); it != weeks.rend() && taken < window_weeks; ++it, ++taken)
            for (double v : it->second) sum += v, ++n;
        const double mean = sum / static_cast<double>(n);
        double ss = 0;
        taken = 0;
        for (auto it = weeks.rbegin(); it != weeks.rend() && taken < window_weeks; ++it, ++taken)
            for (double v : it->second) ss += (v - mean) * (v - mean);
        model.stats[s] = BinStats{mean, std::sqrt(ss / static_cast<double>(n)), n};
    }
    return model;
}

inline double effective_std(const BinStats& b, double std_floor_fraction) {
    return std::max({b.std, std_floor_fraction * b.mean, kStdFloorAbs});
}

struct ZScoreOptions {
    double std_floor_fraction = kDefaultStdFloorFraction;
    // When true, samples in unpopulated slots score NaN instead of raising.
    bool allow_unpopulated = false;
};

inline ZSeries zscore_series(const BaselineModel& model, const TrafficSeries& series,
                             const ZScoreOptions& opts = {}) {
    if (opts.std_floor_fraction < 0) throw ConfigError("std_floor_fraction must be >= 0");
    ZSeries z{series.network_id, series.start, series.step_seconds, {}};
    z.z_values.resize(series.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<std::pair<int, int>> missing_slots;
    for (std::size_t i = 0; i < series.size(); ++i) {
        double x = series.values[i];
        if (is_missing(x)) continue;
        UtcTime t = series.time_at(i);
        const auto& bin = model.at(t);
        if (!bin) {
            std::pair slot{weekday_of(t), model.bin_of(t)};
            if (missing_slots.empty() || missing_slots.back() != slot) missing_slots.push_back(slot);
            continue;
        }
        z.z_values[i] = (x - bin->mean) / effective_std(*bin, opts.std_floor_fraction);
    }
    if (!missing_slots.empty() && !opts.allow_unpopulated) {
        std::string msg = "baseline has no data for slots (weekday,bin):";
        for (std::size_t k = 0; k < missing_slots.size() && k < 20; ++k)
            msg += " (" + std::to_string(missing_slots[k].first) + "," +
                   std::to_string(missing_slots[k].second) + ")";
        if (missing_slots.size() > 20) msg += " ... " + std::to_string(missing_slots.size()) + " total";
        throw PreconditionError(msg);
    }
    return z;
}

inline TrafficSeries slice(const TrafficSeries& s, std::size_t begin, std::size_t end) {
    end = std::min(end, s.size());
    begin = std::min(begin, end);
    TrafficSeries out{s.network_id, s.time_at(begin), s.step_seconds, {}};
    out.values.assign(s.values.begin() + static_cast<std::ptrdiff_t>(begin),
                      s.values.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

struct RollingOptions {
    int window_weeks = 4;
    int bin_minutes = 5;
    double std_floor_fraction = kDefaultStdFloorFraction;
};

// Scores each week against a baseline fit on the preceding window. The first
// week of data is the minimum history; earlier-than-window weeks use all the
// history available. Warm-up samples are NaN.
inline ZSeries rolling_zscore(const TrafficSeries& series, const RollingOptions& opts = {}) {
    validate(series);
    if (kSecondsPerWeek % series.step_seconds != 0)
        throw ConfigError("sampling step must divide one week");
    const auto per_week = static_cast<std::size_t>(kSecondsPerWeek / series.step_seconds);
    ZSeries z{series.network_id, series.start, series.step_seconds,
              std::vector<double>(series.size(), std::numeric_limits<double>::quiet_NaN())};
    for (std::size_t w = 1; w * per_week < series.size(); ++w) {
        std::size_t hist_weeks = std::min<std::size_t>(w, static_cast<std::size_t>(opts.window_weeks));
        TrafficSeries history = slice(series, (w - hist_weeks) * per_week, w * per_week);
        BaselineModel model = fit_baseline(history, opts.window_weeks, opts.bin_minutes);
        TrafficSeries target = slice(series, w * per_week, (w + 1) * per_week);
        ZSeries part = zscore_series(model, target, {opts.std_floor_fraction, true});
        std::copy(part.z_values.begin(), part.z_values.end(),
                  z.z_values.begin() + static_cast<std::ptrdiff_t>(w * per_week));
    }
    return z;
}

}  // namespace spikecast
