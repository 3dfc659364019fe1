#include <random>

#include <gtest/gtest.h>
#include <unistd.h>

#include "spikecast/core/store.hpp"
#include "test_util.hpp"

using namespace spikecast;
using spikecast::test::TempDir;

namespace {

EventAbstraction sample_event() {
    EventAbstraction e;
    e.date = "2025-05-31";
    e.time = "21:00";
    e.description = "Cup final";
    e.event_utc = *parse_utc("2025-05-31T21:00:00Z");
    e.category = "Sports";
    e.entities = StringList{"Team X", "Team Y"};
    e.platforms = StringList{"DAZN"};
    e.data_per_user_mb = 2500;
    e.audience_size = 400000000;
    e.continent_relevance = RelevanceMap{{"Europe", 0.9}};
    e.nation_relevance = RelevanceMap{{"DE", 0.8}, {"FR", 0.7}};
    e.spike_duration_hours = 2.5;
    e.likelihood = 9;
    e.source_records = {"rec-1"};
    e.first_mentioned_at = *parse_utc("2025-05-01T10:00:00Z");
    return e;
}

std::string random_text(std::mt19937_64& rng) {
    static const char* units[] = {"a", "b", "c", " ", "X", "Z", "-", "_", ",", ".", "\"", "\\", "/", "\n", "\t", "\xc3\xa9", "\xe2\x82\xac"};
    std::uniform_int_distribution<int> len(0, 24), pick(0, std::size(units) - 1);
    std::string s;
    for (int i = len(rng); i > 0; --i) s += units[pick(rng)];
    return s;
}

UtcTime random_time(std::mt19937_64& rng) {
    return UtcTime{std::uniform_int_distribution<std::int64_t>(0, 4'000'000'000)(rng)};
}

double random_unit(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0, 1)(rng); }

}  // namespace

TEST(Time, IsoDatesValidateCalendar) {
    EXPECT_TRUE(parse_iso_date("2024-02-29"));
    EXPECT_FALSE(parse_iso_date("2025-02-29"));
    EXPECT_FALSE(parse_iso_date("31/13/2025"));
    EXPECT_FALSE(parse_iso_date("2025-13-01"));
    EXPECT_EQ(format_iso_date(*parse_iso_date("2025-05-31")), "2025-05-31");
}

TEST(Time, UtcRoundTripAndZones) {
    auto t = parse_utc("2025-05-31T20:45:00Z");
    ASSERT_TRUE(t);
    EXPECT_EQ(format_utc(*t), "2025-05-31T20:45:00Z");
    EXPECT_EQ(parse_utc("2025-05-31T22:45:00+02:00")->seconds, t->seconds);
    EXPECT_EQ(parse_utc("2025-05-31 20:45")->seconds, t->seconds);
    EXPECT_FALSE(parse_utc("2025-05-31T25:00:00Z"));
}

TEST(Time, WeekdayMondayIsZero) {
    EXPECT_EQ(weekday_of(*parse_utc("2025-06-02T00:00:00Z")), 0);  // Monday
    EXPECT_EQ(weekday_of(*parse_utc("2025-06-08T23:59:00Z")), 6);  // Sunday
    EXPECT_EQ(weekday_of(UtcTime{0}), 3);                           // Thursday
}

TEST(Time, CivilDaysRoundTrip) {
    for (std::int64_t d = -800000; d <= 800000; d += 997) EXPECT_EQ(days_from_civil(civil_from_days(d)), d);
}

TEST(Store, AppendAssignsUniqueEventId) {
    TempDir dir;
    EventStore store(dir / "events.jsonl");
    std::string a = store.append(sample_event());
    std::string b = store.append(sample_event());
    EXPECT_FALSE(a.empty());
    EXPECT_NE(a, b);
}

TEST(Store, RejectsLikelihoodOutOfRangeNamingField) {
    TempDir dir;
    EventStore store(dir / "events.jsonl");
    auto e = sample_event();
    e.likelihood = 11;
    try {
        store.append(e);
        FAIL() << "expected rejection";
    } catch (const ValidationError& err) {
        EXPECT_EQ(err.field(), "likelihood");
    }
    EXPECT_TRUE(store.current().empty());
}

TEST(Store, ReloadKeepsBothRecordsWithStableIds) {
    TempDir dir;
    std::string a, b;
    {
        EventStore store(dir / "events.jsonl");
        a = store.append(sample_event());
        b = store.append(sample_event());
    }
    EventStore reloaded(dir / "events.jsonl");
    auto all = reloaded.current();
    ASSERT_EQ(all.size(), 2u);
    EXPECT_EQ(all[0].event_id, a);
    EXPECT_EQ(all[1].event_id, b);
    // Ids continue after restart.
    std::string c = reloaded.append(sample_event());
    EXPECT_NE(c, a);
    EXPECT_NE(c, b);
}

TEST(Store, GenericStorePreservesInsertionOrder) {
    TempDir dir;
    constexpr int n = 37;
    {
        JsonlStore<SpikeRecord> store(dir / "spikes.jsonl");
        for (int i = 0; i < n; ++i) {
            SpikeRecord s{"", "net-a", UtcTime{i * 3600}, UtcTime{i * 3600 + 1800}, 3.0 + i, 2.5, 30.0};
            store.append(s);
        }
    }
    JsonlStore<SpikeRecord> store(dir / "spikes.jsonl");
    auto all = store.load();
    ASSERT_EQ(all.size(), static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) EXPECT_EQ(all[i].start.seconds, i * 3600);
    EXPECT_EQ(store.size(), static_cast<std::size_t>(n));
}

TEST(Store, DuplicateRecordIdRejected) {
    TempDir dir;
    JsonlStore<ContentRecord> store(dir / "records.jsonl");
    ContentRecord r;
    r.record_id = "rec-a";
    r.body_text = "hello";
    store.append(r);
    EXPECT_THROW(store.append(r), ValidationError);
}

TEST(Store, MergeTombstonesAbsorbedAndKeepsSurvivor) {
    TempDir dir;
    EventStore store(dir / "events.jsonl");
    auto a = store.append(sample_event());
    auto b = store.append(sample_event());
    auto survivor = *store.find(a);
    survivor.source_records = {"rec-1", "rec-2"};
    survivor.merge_history = {b};
    store.commit_merge(survivor, {b});
    EXPECT_TRUE(store.is_tombstoned(b));
    auto cur = store.current();
    ASSERT_EQ(cur.size(), 1u);
    EXPECT_EQ(cur[0].source_records.size(), 2u);

    EventStore reloaded(dir / "events.jsonl");
    ASSERT_EQ(reloaded.current().size(), 1u);
    EXPECT_EQ(reloaded.current()[0].merge_history, std::vector<std::string>{b});
    auto absorbed = sample_event();
    absorbed.event_id = b;
    EXPECT_THROW(reloaded.update(absorbed), ValidationError);
}

TEST(Store, IoFailureIsRetryable) {
    TempDir dir;
    std::filesystem::create_directories(dir / "blocked.jsonl");
    try {
        append_atomically(dir / "blocked.jsonl", "x\n");
        FAIL();
    } catch (const IoError& e) {
        EXPECT_TRUE(e.retryable());
    }
}

TEST(Serialize, RandomRoundTripIsIdentity) {
    std::mt19937_64 rng(20250531);
    for (int iter = 0; iter < 300; ++iter) {
        EventAbstraction e;
        e.event_id = random_text(rng);
        e.date = "2025-05-31";
        e.time = iter % 3 ? "20:00" : "unknown";
        e.description = random_text(rng) + "x";
        e.event_utc = random_time(rng);
        if (iter % 2) e.category = random_text(rng);
        if (iter % 3) e.entities = StringList{random_text(rng), random_text(rng)};
        if (iter % 4) e.platforms = StringList{random_text(rng)};
        if (iter % 5) e.data_per_user_mb = static_cast<std::int64_t>(rng() % 100000);
        if (iter % 6) e.audience_size = static_cast<std::int64_t>(rng() % 4'000'000'000ull);
        if (iter % 2) e.continent_relevance = RelevanceMap{{random_text(rng), random_unit(rng)}};
        if (iter % 3) e.nation_relevance = RelevanceMap{{"DE", random_unit(rng)}, {"US", random_unit(rng)}};
        if (iter % 2) e.spike_duration_hours = random_unit(rng) * 10;
        if (iter % 2) e.likelihood = static_cast<int>(rng() % 11);
        if (iter % 3 == 0) e.semantic_signature = SemanticSignature{{10, 100}, {static_cast<int>(rng() % 10), 42}};
        e.source_records = {random_text(rng), random_text(rng)};
        e.first_mentioned_at = random_time(rng);
        e.merge_history = {random_text(rng)};
        e.low_confidence_fields = {"category"};
        Json j = e;
        EXPECT_EQ(Json::parse(j.dump()).get<EventAbstraction>(), e);

        ContentRecord r;
        r.record_id = random_text(rng);
        r.source = static_cast<SourceKind>(iter % 3);
        r.url = random_text(rng);
        r.created_at = random_time(rng);
        r.fetched_at = random_time(rng);
        r.title = random_text(rng);
        r.body_text = random_text(rng);
        r.comments = {random_text(rng), random_text(rng)};
        r.engagement = static_cast<std::int64_t>(rng() % 10000);
        r.linked_texts = {{random_text(rng), random_text(rng)}};
        EXPECT_EQ(Json::parse(Json(r).dump()).get<ContentRecord>(), r);

        SpikeRecord s{random_text(rng), random_text(rng), random_time(rng), random_time(rng),
                      random_unit(rng) * 9, random_unit(rng), random_unit(rng) * 100};
        s.start.seconds -= s.start.seconds % 60;
        s.end.seconds -= s.end.seconds % 60;
        EXPECT_EQ(Json::parse(Json(s).dump()).get<SpikeRecord>(), s);

        EventDraft d{random_text(rng), "2025-06-01", "unknown", random_text(rng), iter % 2 == 0};
        EXPECT_EQ(Json::parse(Json(d).dump()).get<EventDraft>(), d);

        InferenceRun run;
        run.event_id = random_text(rng);
        run.field_name = "audience_size";
        run.attempts = 2;
        run.attempt_outputs = {{FieldValue{std::int64_t{5}}, std::nullopt, FieldValue{random_unit(rng)}},
                               {FieldValue{StringList{"a"}}, FieldValue{RelevanceMap{{"EU", 0.5}}},
                                FieldValue{std::string("x")}}};
        if (iter % 2) run.consensus_value = FieldValue{std::int64_t{7}};
        EXPECT_EQ(Json::parse(Json(run).dump()).get<InferenceRun>(), run);
    }
}

TEST(Serialize, SchemaVersionRequired) {
    Json j = sample_event();
    j.erase("schema_version");
    EXPECT_THROW(j.get<EventAbstraction>(), ValidationError);
}
