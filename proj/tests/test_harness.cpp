#include <cstdlib>
#include <filesystem>

#include <gtest/gtest.h>

#include "spikecast/harness/dataset.hpp"
#include "test_util.hpp"

using namespace spikecast;
using spikecast::test::slurp;
using spikecast::test::TempDir;

namespace {

const UtcTime kStart = *parse_utc("2025-03-03T00:00:00Z");  // a Monday

Scenario small_scenario(int weeks = 3) {
    Scenario s;
    s.seed = 11;
    s.start = kStart;
    s.duration_weeks = weeks;
    s.networks = {{"ixp-a", 1e11, "DE", "Europe"}};
    s.background_posts = 2;
    s.search_terms = {"premiere"};
    return s;
}

PlantedEvent plant(const std::string& id, const std::string& headline, const std::string& when, double lead_days) {
    PlantedEvent p;
    p.id = id;
    p.headline = headline;
    p.time = *parse_utc(when);
    p.magnitude_z = 5.0;
    p.duration_min = 60;
    p.category = "TV & Film";
    p.lead_days = lead_days;
    p.networks = {"ixp-a"};
    p.entities = {headline};
    p.platforms = {"StreamFlix"};
    p.continent_relevance = {{"Europe", 0.8}};
    p.nation_relevance = {{"DE", 0.7}};
    return p;
}

// Fraction of [lo, hi) covered by the union of spikes on one network.
double covered_fraction(const std::vector<SpikeRecord>& spikes, UtcTime lo, UtcTime hi) {
    std::int64_t covered = 0;
    for (std::int64_t t = lo.seconds; t < hi.seconds; t += 60)
        for (const auto& s : spikes)
            if (s.start.seconds <= t && t < s.end.seconds) {
                covered += 60;
                break;
            }
    return static_cast<double>(covered) / static_cast<double>(hi.seconds - lo.seconds);
}

std::vector<SpikeRecord> spikes_of(const Scenario& s) {
    std::vector<SpikeRecord> out;
    for (const auto& ts : synth_traffic(s).series)
        for (auto& sp : detect_spikes(rolling_zscore(ts))) out.push_back(sp);
    return out;
}

PipelineConfig dataset(const Scenario& s, const std::filesystem::path& dir) {
    write_synthetic_dataset(s, dir);
    return load_pipeline_config(dir / "pipeline.json");
}

}  // namespace

TEST(Scenario, RejectsBadShapes) {
    auto s = small_scenario();
    s.start = kStart.plus_seconds(kSecondsPerDay);
    EXPECT_THROW(validate(s), ConfigError);

    s = small_scenario();
    s.planted_events = {plant("a", "Show", "2025-03-12T20:00:00Z", 3)};
    s.planted_events[0].spontaneous = true;
    EXPECT_THROW(validate(s), ConfigError);

    s = small_scenario();
    s.planted_events = {plant("a", "Show", "2025-03-12T20:00:00Z", 3)};
    s.planted_events[0].networks = {"nowhere"};
    EXPECT_THROW(validate(s), ConfigError);

    s = small_scenario();
    s.planted_events = {plant("a", "Show", "2025-03-12T20:00:00Z", 3)};
    s.planted_events[0].duplicate_posts = 1;  // no alt headline
    EXPECT_THROW(validate(s), ConfigError);
}

TEST(Scenario, JsonRoundTrip) {
    auto s = small_scenario();
    s.planted_events = {plant("a", "Show", "2025-03-12T20:00:00Z", 3)};
    Json j = s;
    EXPECT_EQ(Json(j.get<Scenario>()), j);
}

TEST(Scenario, CommittedScenarioIsValid) {
    auto s = load_scenario(std::filesystem::path(SPIKECAST_SOURCE_DIR) / "scenarios" / "s1.json");
    EXPECT_GE(s.planted_events.size(), 20u);
    std::size_t spontaneous = 0;
    for (const auto& p : s.planted_events) spontaneous += p.spontaneous;
    EXPECT_GE(spontaneous, 1u);
}

TEST(SynthTraffic, NullScenarioHasNoSpikes) {
    auto s = small_scenario(6);
    EXPECT_TRUE(spikes_of(s).empty());
}

TEST(SynthTraffic, PlantedSpikeIsRecovered) {
    auto s = small_scenario();
    s.planted_events = {plant("a", "Show", "2025-03-12T20:00:00Z", 3)};
    auto spikes = spikes_of(s);
    ASSERT_FALSE(spikes.empty());
    const auto& p = s.planted_events[0];
    EXPECT_GE(covered_fraction(spikes, p.time, p.time.plus_minutes(p.duration_min)), 0.8);
    for (const auto& sp : spikes) {
        EXPECT_LT(sp.start, p.time.plus_minutes(p.duration_min + 10));
        EXPECT_GT(sp.end, p.time.plus_minutes(-10));
        EXPECT_NEAR(sp.mean_z, p.magnitude_z, 1.0);
    }
}

TEST(SynthTraffic, PlantInWarmupWeekIsNotScored) {
    auto s = small_scenario();
    s.planted_events = {plant("a", "Show", "2025-03-05T20:00:00Z", 3)};
    EXPECT_TRUE(spikes_of(s).empty());
}

TEST(SynthTraffic, LabelsFollowPlants) {
    auto s = small_scenario();
    s.networks.push_back({"ixp-b", 5e10, "US", "North America"});
    s.planted_events = {plant("a", "Show", "2025-03-12T20:00:00Z", 3)};
    s.planted_events[0].networks = {"ixp-a", "ixp-b"};
    auto t = synth_traffic(s);
    ASSERT_EQ(t.labels.size(), 2u);
    EXPECT_EQ(t.labels[0].network_id, "ixp-a");
    EXPECT_EQ(t.labels[1].network_id, "ixp-b");
    EXPECT_EQ(t.labels[0].end, s.planted_events[0].time.plus_minutes(60));
}

TEST(Synth, SameSeedSameOutputDifferentSeedDiffers) {
    auto s = small_scenario();
    s.planted_events = {plant("a", "Show", "2025-03-12T20:00:00Z", 3)};
    auto a = synth_traffic(s), b = synth_traffic(s);
    EXPECT_EQ(a.series[0].values, b.series[0].values);
    EXPECT_EQ(synth_corpus(s).posts, synth_corpus(s).posts);
    s.seed += 1;
    EXPECT_NE(synth_traffic(s).series[0].values, a.series[0].values);
}

TEST(SynthCorpus, FivePlantsGiveFilterablePosts) {
    auto s = small_scenario();
    for (int i = 0; i < 5; ++i)
        s.planted_events.push_back(plant("p" + std::to_string(i), "Premiere number " + std::to_string(i),
                                         format_utc(kStart.plus_seconds((8 + i) * kSecondsPerDay + 20 * 3600)), 2));
    s.background_posts = 0;
    auto corpus = synth_corpus(s);
    FilterConfig f{{"premiere"}, {}, 0, false};
    std::size_t passing = 0;
    for (const auto& p : corpus.posts) passing += passes_filter(p, f);
    EXPECT_GE(passing, 5u);
}

TEST(SynthCorpus, PostsCarryLeadAndDuplicates) {
    auto s = small_scenario();
    s.planted_events = {plant("a", "Show Premiere", "2025-03-12T20:00:00Z", 30)};
    s.planted_events[0].alt_headline = "Premiere Show";
    s.planted_events[0].duplicate_posts = 2;
    auto corpus = synth_corpus(s);
    std::vector<const RawPost*> plant_posts;
    for (const auto& p : corpus.posts)
        if (p.post_id.starts_with("p-a")) plant_posts.push_back(&p);
    ASSERT_EQ(plant_posts.size(), 3u);
    EXPECT_EQ(plant_posts[0]->post_id, "p-a");
    EXPECT_EQ(plant_posts[0]->created_at, s.planted_events[0].time.plus_seconds(-30 * kSecondsPerDay));
    for (const auto* p : plant_posts) EXPECT_LE(p->created_at, s.planted_events[0].time);
}

TEST(Pipeline, LeadTimeOf30DaysSurvivesTheRun) {
    TempDir dir;
    auto s = small_scenario();
    s.planted_events = {plant("a", "Moonrise Premiere", "2025-03-12T20:00:00Z", 30)};
    auto cfg = dataset(s, dir.path());
    auto rep = run_pipeline(cfg);
    ASSERT_TRUE(rep.ok()) << rep.to_json().dump(2);
    auto events = final_events(cfg);
    ASSERT_EQ(events.size(), 1u);
    EXPECT_EQ(events[0].event_utc, s.planted_events[0].time);
    EXPECT_DOUBLE_EQ(lead_days(events[0]), 30.0);
    EXPECT_EQ(events[0].category, "TV & Film");
    // A 30-day lead is forecastable, so the planted spike is matched.
    EXPECT_EQ(rep.stage("report").details["coverage"]["fraction"], 1.0);
}

TEST(Pipeline, DuplicateAnnouncementsLeaveOneSurvivor) {
    TempDir dir;
    auto s = small_scenario();
    s.planted_events = {plant("a", "Moonrise Finale Premiere", "2025-03-12T20:00:00Z", 9)};
    s.planted_events[0].alt_headline = "Premiere: Moonrise Finale";
    s.planted_events[0].duplicate_posts = 2;
    auto cfg = dataset(s, dir.path());
    auto rep = run_pipeline(cfg);
    ASSERT_TRUE(rep.ok()) << rep.to_json().dump(2);
    auto events = final_events(cfg);
    ASSERT_EQ(events.size(), 1u);
    EXPECT_EQ(events[0].description, "Moonrise Finale Premiere");  // the earliest mention survives
    EXPECT_EQ(events[0].merge_history.size(), 2u);
    EXPECT_EQ(events[0].source_records.size(), 3u);
    EXPECT_TRUE(events[0].stale_fields.empty());
    EXPECT_TRUE(events[0].category.has_value());
}

TEST(Pipeline, SpontaneousEventIsNotForecast) {
    TempDir dir;
    auto s = small_scenario();
    s.planted_events = {plant("a", "Sudden Outage Live", "2025-03-12T20:00:00Z", 0)};
    s.planted_events[0].spontaneous = true;
    auto cfg = dataset(s, dir.path());
    auto rep = run_pipeline(cfg);
    ASSERT_TRUE(rep.ok()) << rep.to_json().dump(2);
    const auto& r = rep.stage("report").details;
    EXPECT_GE(r["spontaneous"]["spikes"].get<int>(), 1);
    EXPECT_EQ(r["spontaneous"]["matched"], 0);
    EXPECT_EQ(r["coverage"]["event_driven_spikes"], 0);
}

TEST(Pipeline, EmptyCorpusSucceedsWithNothing) {
    TempDir dir;
    auto s = small_scenario();
    s.background_posts = 0;
    auto cfg = dataset(s, dir.path());
    auto rep = run_pipeline(cfg);
    ASSERT_TRUE(rep.ok()) << rep.to_json().dump(2);
    EXPECT_EQ(rep.stage("infer").details["events"], 0);
    EXPECT_EQ(rep.stage("correlate").details["matches"], 0);
    EXPECT_TRUE(final_events(cfg).empty());
}

TEST(Pipeline, BackgroundChatterYieldsNoEvents) {
    TempDir dir;
    auto s = small_scenario();
    s.background_posts = 4;
    auto cfg = dataset(s, dir.path());
    auto rep = run_pipeline(cfg);
    ASSERT_TRUE(rep.ok());
    EXPECT_EQ(rep.stage("ingest").details["records"], 4);
    EXPECT_EQ(rep.stage("infer").details["events"], 0);
}

TEST(Pipeline, MissingFixtureHaltsAndNamesTheHash) {
    TempDir dir;
    auto s = small_scenario();
    s.planted_events = {plant("a", "Moonrise Premiere", "2025-03-12T20:00:00Z", 5)};
    auto cfg = dataset(s, dir.path());

    // Remove every extraction fixture; whichever record goes first must fail.
    Json fx = Json::parse(slurp(dir / "stub_fixtures.json"));
    std::set<std::string> removed;
    for (const auto& [hash, value] : fx["fixtures"].items())
        if (value.is_string() && value.get<std::string>().starts_with("{\"events\""))
            removed.insert(hash);
    ASSERT_FALSE(removed.empty());
    for (const auto& h : removed) fx["fixtures"].erase(h);
    write_text(dir / "stub_fixtures.json", fx.dump());

    auto rep = run_pipeline(cfg);
    EXPECT_FALSE(rep.ok());
    const auto* failed = rep.failed_stage();
    ASSERT_NE(failed, nullptr);
    EXPECT_EQ(failed->name, "infer");
    EXPECT_TRUE(removed.count(failed->missing_fixture)) << failed->missing_fixture;
    EXPECT_NE(failed->error.find(failed->missing_fixture), std::string::npos);
    // Downstream stages never ran; upstream artifacts stay.
    EXPECT_EQ(rep.stage("dedup").status, "skipped");
    EXPECT_EQ(rep.stage("report").status, "skipped");
    EXPECT_TRUE(std::filesystem::exists(cfg.out_dir / artifact::kRecords));
    auto on_disk = Json::parse(slurp(cfg.out_dir / artifact::kRunReport));
    EXPECT_EQ(on_disk["status"], "failed");
    EXPECT_EQ(on_disk["failed_stage"], "infer");
    EXPECT_EQ(on_disk["stages"][1]["missing_fixture"], failed->missing_fixture);
}

TEST(Pipeline, StubReplayMatchesTheTruthBackedRun) {
    TempDir dir;
    auto s = small_scenario(4);
    s.planted_events = {plant("a", "Moonrise Premiere", "2025-03-12T20:00:00Z", 5),
                        plant("b", "Starlight Premiere", "2025-03-20T18:00:00Z", 40)};
    s.planted_events[1].category = "Music";
    auto cfg = dataset(s, dir.path());
    ASSERT_TRUE(run_pipeline(cfg).ok());
    const std::string replayed = slurp(cfg.out_dir / artifact::kEventsFinal);

    PromptLibrary prompts;
    PlantedTruthBackend truth(s, prompts);
    cfg.out_dir = dir / "direct";
    ASSERT_TRUE(run_pipeline(cfg, &truth).ok());
    EXPECT_EQ(slurp(cfg.out_dir / artifact::kEventsFinal), replayed);
}

TEST(Pipeline, TwoRunsAreByteIdentical) {
    TempDir dir;
    auto s = small_scenario(4);
    s.planted_events = {plant("a", "Moonrise Premiere", "2025-03-12T20:00:00Z", 5),
                        plant("b", "Starlight Premiere", "2025-03-20T18:00:00Z", 40)};
    auto cfg = dataset(s, dir.path());
    ASSERT_TRUE(run_pipeline(cfg).ok());
    auto first = cfg.out_dir;
    cfg.out_dir = dir / "again";
    ASSERT_TRUE(run_pipeline(cfg).ok());
    for (const auto& entry : std::filesystem::directory_iterator(first)) {
        const auto name = entry.path().filename().string();
        if (name == artifact::kTimings) continue;
        EXPECT_EQ(slurp(entry.path()), slurp(cfg.out_dir / name)) << name;
    }
}

TEST(PipelineConfig, RejectsUnknownKeysAndResolvesPaths) {
    TempDir dir;
    Json j{{"traffic", "t.csv"},
           {"ingestion", {{"corpus", "posts.jsonl"}, {"filter", {{"communities", {"events"}}}}}},
           {"inference", {{"fixtures", "fx.json"}}}};
    auto c = parse_pipeline_config(j, dir.path());
    EXPECT_EQ(c.traffic, dir / "t.csv");
    EXPECT_EQ(c.out_dir, dir / "out");
    EXPECT_TRUE(c.match.require_advance_notice);

    Json bad = j;
    bad["tarffic"] = "typo.csv";
    EXPECT_THROW(parse_pipeline_config(bad, dir.path()), ConfigError);
    bad = j;
    bad["clustering"] = {{"levels", Json::array()}};
    EXPECT_THROW(parse_pipeline_config(bad, dir.path()), ConfigError);
    bad = j;
    bad["ingestion"]["filter"] = Json::object();
    EXPECT_THROW(parse_pipeline_config(bad, dir.path()), ConfigError);
}

namespace {

int cli(const std::string& args) {
    const std::string cmd = std::string(SPIKECAST_CLI) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Cli, SynthRunReportAndExitCodes) {
    TempDir dir;
    auto s = small_scenario();
    s.planted_events = {plant("a", "Moonrise Premiere", "2025-03-12T20:00:00Z", 5)};
    write_text(dir / "scenario.json", Json(s).dump());
    const std::string d = (dir / "ds").string();
    ASSERT_EQ(cli("synth --scenario " + (dir / "scenario.json").string() + " --out-dir " + d), 0);
    ASSERT_EQ(cli("run --config " + d + "/pipeline.json"), 0);
    EXPECT_EQ(cli("report coverage --format json --config " + d + "/pipeline.json"), 0);
    EXPECT_EQ(cli("report lead-time --format csv --config " + d + "/pipeline.json"), 0);
    EXPECT_EQ(cli("detect-spikes --traffic " + d + "/traffic.csv --out-dir " + d + "/solo"), 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "ds" / "solo" / artifact::kSpikes));
    EXPECT_EQ(cli("correlate --config " + d + "/pipeline.json"), 0);

    write_text(dir / "bad.json", R"({"traffic": "t.csv", "bogus": 1})");
    EXPECT_EQ(cli("run --config " + (dir / "bad.json").string()), 2);
    EXPECT_NE(cli("report bogus"), 0);

    write_text(dir / "ds" / "stub_fixtures.json", R"({"fixtures": {}})");
    EXPECT_EQ(cli("run --config " + d + "/pipeline.json"), 1);
}
