#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "spikecast/baseline/spikes.hpp"
#include "spikecast/baseline/traffic_csv.hpp"

using namespace spikecast;

namespace {

// 2025-06-02 is a Monday.
const UtcTime kMonday = *parse_utc("2025-06-02T00:00:00Z");

TrafficSeries constant_series(double level, int weeks, std::int64_t step = 300) {
    TrafficSeries s{"net-a", kMonday, step, {}};
    s.values.assign(static_cast<std::size_t>(weeks * kSecondsPerWeek / step), level);
    return s;
}

ZSeries zseries_minutes(std::vector<double> z) {
    return ZSeries{"net-a", kMonday, 60, std::move(z)};
}

}  // namespace

TEST(FitBaseline, ConstantSeriesGivesExactMeanAndZeroStd) {
    auto model = fit_baseline(constant_series(100.0, 4), 4, 5);
    for (const auto& b : model.stats) {
        ASSERT_TRUE(b.has_value());
        EXPECT_DOUBLE_EQ(b->mean, 100.0);
        EXPECT_DOUBLE_EQ(b->std, 0.0);
        EXPECT_EQ(b->count, 4u);
    }
}

TEST(FitBaseline, WeekdayLevelsRecovered) {
    auto s = constant_series(0, 4);
    for (std::size_t i = 0; i < s.size(); ++i) s.values[i] = 100.0 * (weekday_of(s.time_at(i)) + 1);
    auto model = fit_baseline(s, 4, 5);
    for (int wd = 0; wd < 7; ++wd)
        for (int bin = 0; bin < model.bins_per_day(); ++bin) {
            EXPECT_DOUBLE_EQ(model.at(wd, bin)->mean, 100.0 * (wd + 1));
            EXPECT_DOUBLE_EQ(model.at(wd, bin)->std, 0.0);
        }
}

TEST(FitBaseline, MatchesGroupingOracleOnRandomSeries) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> noise(0, 15);
    for (int trial = 0; trial < 4; ++trial) {
        // Start mid-week with 1-minute samples, six weeks, window of four.
        TrafficSeries s{"net-r", kMonday.plus_seconds(2 * 86400 + 3 * 3600 + 420), 60, {}};
        s.values.resize(6 * 7 * 1440);
        for (std::size_t i = 0; i < s.size(); ++i) {
            s.values[i] = std::max(0.0, 500 + 100 * std::sin(i / 300.0) + noise(rng));
            if (rng() % 97 == 0) s.values[i] = std::numeric_limits<double>::quiet_NaN();
        }
        const int window = 2 + trial % 3;
        const int bin_minutes = trial % 2 ? 15 : 5;
        auto model = fit_baseline(s, window, bin_minutes);
        auto expected = oracle::grouped_stats(s, window, bin_minutes);
        std::size_t populated = 0;
        for (int wd = 0; wd < 7; ++wd)
            for (int bin = 0; bin < model.bins_per_day(); ++bin) {
                auto it = expected.find({wd, bin});
                const auto& got = model.at(wd, bin);
                ASSERT_EQ(got.has_value(), it != expected.end());
                if (!got) continue;
                ++populated;
                EXPECT_NEAR(got->mean, it->second.mean, 1e-9 * it->second.mean);
                EXPECT_NEAR(got->std, it->second.std, 1e-7);
                EXPECT_EQ(got->count, it->second.count);
            }
        EXPECT_EQ(populated, expected.size());
    }
}

TEST(FitBaseline, RejectsShortSeriesAndBadConfig) {
    EXPECT_THROW(fit_baseline(constant_series(1.0, 0) /*empty*/, 4, 5), ValidationError);
    auto s = constant_series(1.0, 1);
    s.values.pop_back();
    EXPECT_THROW(fit_baseline(s, 4, 5), PreconditionError);
    EXPECT_THROW(fit_baseline(constant_series(1.0, 1), 4, 7), ConfigError);
    EXPECT_THROW(fit_baseline(constant_series(1.0, 1), 0, 5), ConfigError);
}

TEST(FitBaseline, UnpopulatedSlotsStayEmpty) {
    auto s = constant_series(50, 2);
    // Blank out Tuesday 10:00-10:05 in both weeks.
    for (std::size_t i = 0; i < s.size(); ++i) {
        UtcTime t = s.time_at(i);
        if (weekday_of(t) == 1 && seconds_of_day(t) >= 36000 && seconds_of_day(t) < 36300)
            s.values[i] = std::numeric_limits<double>::quiet_NaN();
    }
    auto model = fit_baseline(s, 4, 5);
    EXPECT_FALSE(model.at(1, 120).has_value());
    TrafficSeries probe{"net-a", kMonday.plus_seconds(86400 + 36000 - 300), 300, {50, 50, 50}};
    try {
        zscore_series(model, probe);
        FAIL();
    } catch (const PreconditionError& e) {
        EXPECT_NE(std::string(e.what()).find("(1,120)"), std::string::npos);
    }
    auto lenient = zscore_series(model, probe, {0.05, true});
    EXPECT_DOUBLE_EQ(lenient.z_values[0], 0.0);
    EXPECT_TRUE(std::isnan(lenient.z_values[1]));
}

TEST(ZScore, ArithmeticExamples) {
    BaselineModel m;
    m.bin_minutes = 5;
    m.stats.assign(7 * 288, BinStats{100.0, 10.0, 4});
    TrafficSeries s{"net-a", kMonday, 300, {130.0, 100.0}};
    auto z = zscore_series(m, s, {0.05, false});
    EXPECT_DOUBLE_EQ(z.z_values[0], 3.0);
    EXPECT_DOUBLE_EQ(z.z_values[1], 0.0);
}

TEST(ZScore, FlatHistoryUsesFloor) {
    auto model = fit_baseline(constant_series(100.0, 4), 4, 5);
    TrafficSeries s{"net-a", kMonday, 300, {100.0, 110.0}};
    auto z = zscore_series(model, s);
    EXPECT_DOUBLE_EQ(z.z_values[0], 0.0);
    EXPECT_DOUBLE_EQ(z.z_values[1], 2.0);  // 10 / (0.05 * 100)
    auto zero = fit_baseline(constant_series(0.0, 1), 1, 5);
    TrafficSeries flat{"net-a", kMonday, 300, {0.0, 1e-6}};
    auto z0 = zscore_series(zero, flat);
    EXPECT_DOUBLE_EQ(z0.z_values[0], 0.0);
    EXPECT_DOUBLE_EQ(z0.z_values[1], 1.0);
}

TEST(ZScore, ReconstructsInputWhenStdAboveFloor) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> noise(0, 40);
    auto s = constant_series(0, 4);
    for (auto& v : s.values) v = std::max(0.0, 300 + noise(rng));
    auto model = fit_baseline(s, 4, 5);
    auto z = zscore_series(model, s);
    int checked = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto& b = *model.at(s.time_at(i));
        if (b.std <= std::max(0.05 * b.mean, kStdFloorAbs)) continue;
        double back = b.mean + z.z_values[i] * b.std;
        EXPECT_NEAR(back, s.values[i], 1e-9 * std::max(1.0, std::abs(s.values[i])));
        ++checked;
    }
    EXPECT_GT(checked, 1000);
}

TEST(DetectSpikes, AllBelowThresholdIsEmpty) {
    EXPECT_TRUE(detect_spikes(zseries_minutes(std::vector<double>(500, 1.9))).empty());
}

TEST(DetectSpikes, SingleThirtyMinuteRun) {
    std::vector<double> z(300, 0.0);
    for (int m = 100; m <= 129; ++m) z[m] = 2.5;
    auto spikes = detect_spikes(zseries_minutes(z));
    ASSERT_EQ(spikes.size(), 1u);
    EXPECT_DOUBLE_EQ(spikes[0].duration_minutes, 30.0);
    EXPECT_DOUBLE_EQ(spikes[0].peak_z, 2.5);
    EXPECT_EQ(spikes[0].start, kMonday.plus_minutes(100));
    EXPECT_EQ(spikes[0].end, kMonday.plus_minutes(130));
}

TEST(DetectSpikes, ShortDipIsMerged) {
    std::vector<double> z(200, 0.0);
    for (int m = 10; m < 35; ++m) z[m] = 3.0;
    for (int m = 35; m < 38; ++m) z[m] = 1.0;
    for (int m = 38; m < 63; ++m) z[m] = 3.0;
    auto spikes = detect_spikes(zseries_minutes(z), {2.0, 20.0, 5.0});
    ASSERT_EQ(spikes.size(), 1u);
    EXPECT_DOUBLE_EQ(spikes[0].duration_minutes, 53.0);
    EXPECT_DOUBLE_EQ(spikes[0].mean_z, 3.0);
    // A 5-minute dip is not shorter than the merge gap: two spikes.
    for (int m = 35; m < 40; ++m) z[m] = 1.0;
    EXPECT_EQ(detect_spikes(zseries_minutes(z), {2.0, 20.0, 5.0}).size(), 2u);
}

TEST(DetectSpikes, MissingSampleBreaksContiguity) {
    std::vector<double> z(100, 0.0);
    for (int m = 10; m < 40; ++m) z[m] = 3.0;
    z[25] = std::numeric_limits<double>::quiet_NaN();
    auto spikes = detect_spikes(zseries_minutes(z), {2.0, 10.0, 5.0});
    ASSERT_EQ(spikes.size(), 2u);
    EXPECT_DOUBLE_EQ(spikes[0].duration_minutes, 15.0);
}

TEST(DetectSpikes, HigherThresholdCanSplitOneSpikeIntoTwo) {
    // 60 minutes above 2 with a 10-minute stretch at 2.2 in the middle: one
    // spike at z>=2, two spikes at z>=2.5.
    std::vector<double> z(120, 0.0);
    for (int m = 10; m < 70; ++m) z[m] = 3.0;
    for (int m = 35; m < 45; ++m) z[m] = 2.2;
    EXPECT_EQ(detect_spikes(zseries_minutes(z), {2.0, 20.0, 5.0}).size(), 1u);
    EXPECT_EQ(detect_spikes(zseries_minutes(z), {2.5, 20.0, 5.0}).size(), 2u);
}

TEST(DetectSpikes, RejectsNonPositiveConfig) {
    auto z = zseries_minutes({3, 3, 3});
    EXPECT_THROW(detect_spikes(z, {0.0, 20, 5}), ConfigError);
    EXPECT_THROW(detect_spikes(z, {2.0, 0, 5}), ConfigError);
    EXPECT_THROW(detect_spikes(z, {2.0, 20, -1}), ConfigError);
}

TEST(DetectSpikes, PropertiesOnRandomSeries) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        auto z = oracle::random_zseries(rng, 2000, trial % 2 ? 60 : 300);
        auto spikes = detect_spikes(z);
        EXPECT_EQ(spikes, detect_spikes(z));  // idempotent
        for (std::size_t i = 0; i < spikes.size(); ++i) {
            EXPECT_GE(spikes[i].mean_z, 2.0);
            EXPECT_GE(spikes[i].peak_z, spikes[i].mean_z);
            EXPECT_GE(spikes[i].duration_minutes, 20.0);
            EXPECT_NO_THROW(validate(spikes[i]));
            if (i) {
                EXPECT_GT(spikes[i].start, spikes[i - 1].end);
            }
        }
        // Raising the threshold only shrinks: every spike found at a higher
        // threshold lies inside one found at the lower threshold.
        auto lower = spikes;
        for (double thr : {2.5, 3.0, 4.0, 6.0}) {
            auto higher = detect_spikes(z, {thr, 20.0, 5.0});
            for (const auto& h : higher) {
                bool nested = std::any_of(lower.begin(), lower.end(), [&](const SpikeRecord& l) {
                    return l.start <= h.start && h.end <= l.end;
                });
                EXPECT_TRUE(nested);
            }
            lower = higher;
        }
    }
}

TEST(DetectSpikes, MatchesNaiveOracle) {
    std::mt19937_64 rng(2025);
    for (int trial = 0; trial < 200; ++trial) {
        auto z = oracle::random_zseries(rng, 1500, 60 * (1 + trial % 5));
        SpikeDetectConfig cfg{2.0, 20.0, 5.0 * (trial % 3)};
        EXPECT_EQ(detect_spikes(z, cfg),
                  oracle::naive_spikes(z, cfg.z_threshold, cfg.min_duration_minutes, cfg.merge_gap_minutes));
    }
}

TEST(SpikeFrequency, CountsPerThreshold) {
    std::vector<SpikeRecord> spikes(3);
    spikes[0].peak_z = 2.1;
    spikes[1].peak_z = 3.5;
    spikes[2].peak_z = 6.0;
    auto h = spike_frequency(spikes, {2, 3, 5});
    ASSERT_EQ(h.size(), 3u);
    EXPECT_EQ(h[0].second, 3u);
    EXPECT_EQ(h[1].second, 2u);
    EXPECT_EQ(h[2].second, 1u);
    for (auto& [b, c] : spike_frequency({}, {2, 3, 5})) EXPECT_EQ(c, 0u);
    EXPECT_THROW(spike_frequency(spikes, {}), ConfigError);
    EXPECT_THROW(spike_frequency(spikes, {3, 3}), ConfigError);
}

TEST(SpikeFrequency, MatchesFilterAndCount) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> peak(2.0, 12.0);
    std::vector<double> bins{2, 2.5, 3, 4, 5, 8, 10};
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<SpikeRecord> spikes(rng() % 60);
        for (auto& s : spikes) s.peak_z = peak(rng);
        auto h = spike_frequency(spikes, bins);
        for (std::size_t i = 0; i < bins.size(); ++i) {
            std::size_t expect = 0;
            for (const auto& s : spikes) expect += s.peak_z >= bins[i];
            EXPECT_EQ(h[i].second, expect);
            if (i) {
                EXPECT_LE(h[i].second, h[i - 1].second);
            }
        }
    }
}

TEST(TrafficCsv, ParsesInterleavedNetworksWithGaps) {
    std::istringstream in(
        "timestamp_utc,network_id,bits_per_second\n"
        "2025-06-02T00:00:00Z,a,10\n"
        "2025-06-02T00:00:00Z,b,5.5\n"
        "2025-06-02T00:05:00Z,a,11\n"
        "2025-06-02T00:15:00Z,a,12\n");
    auto m = parse_traffic_csv(in);
    ASSERT_EQ(m.size(), 2u);
    const auto& a = m.at("a");
    EXPECT_EQ(a.step_seconds, 300);
    ASSERT_EQ(a.values.size(), 4u);
    EXPECT_TRUE(std::isnan(a.values[2]));
    EXPECT_DOUBLE_EQ(a.values[3], 12.0);
}

TEST(TrafficCsv, RejectsBadRows) {
    std::istringstream bad_header("time,net,bps\n");
    EXPECT_THROW(parse_traffic_csv(bad_header), ValidationError);
    std::istringstream negative("timestamp_utc,network_id,bits_per_second\n2025-06-02T00:00:00Z,a,-1\n");
    EXPECT_THROW(parse_traffic_csv(negative), ValidationError);
}

TEST(RollingZScore, DetectsPlantedBumpAfterWarmup) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0, 2);
    auto s = constant_series(0, 6);
    for (std::size_t i = 0; i < s.size(); ++i) s.values[i] = 100 + 20 * (weekday_of(s.time_at(i)) % 2) + noise(rng);
    // Week 5, Wednesday 20:00, +30 for one hour.
    std::size_t at = (5 * 7 * 288) + 2 * 288 + 240;
    for (std::size_t i = at; i < at + 12; ++i) s.values[i] += 30;
    auto z = rolling_zscore(s, {4, 5, 0.05});
    EXPECT_TRUE(std::isnan(z.z_values[10]));  // first week is warm-up
    auto spikes = detect_spikes(z);
    ASSERT_EQ(spikes.size(), 1u);
    EXPECT_EQ(spikes[0].start, s.time_at(at));
    EXPECT_DOUBLE_EQ(spikes[0].duration_minutes, 60.0);
}
