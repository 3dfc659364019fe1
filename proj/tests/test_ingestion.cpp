#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "spikecast/ingestion/ingest.hpp"
#include "test_util.hpp"

using namespace spikecast;
using spikecast::test::data_dir;
using spikecast::test::TempDir;
using spikecast::test::FixtureServer;
using spikecast::test::slurp;

namespace {


RawPost post_with(std::int64_t score, std::vector<std::string> links = {}) {
    RawPost p;
    p.post_id = "p" + std::to_string(score) + "_" + std::to_string(links.size());
    p.community = "misc";
    p.title = "Something happening";
    p.body = "body";
    p.score = score;
    p.outbound_urls = std::move(links);
    return p;
}

class VectorConnector : public SourceConnector {
public:
    explicit VectorConnector(std::vector<RawPost> posts) : posts_(std::move(posts)) {}
    std::vector<RawPost> fetch_candidates(const FilterConfig&, SkipReport&) const override { return posts_; }

private:
    std::vector<RawPost> posts_;
};

// Local HTTP server on an ephemeral port, stopped on scope exit.

}  // namespace

TEST(Filter, EngagementThreshold) {
    VectorConnector c({post_with(10), post_with(60), post_with(90)});
    auto res = list_posts(c, FilterConfig{{}, {"misc"}, 50, false});
    ASSERT_EQ(res.posts.size(), 2u);
    EXPECT_EQ(res.posts[0].score, 60);
    EXPECT_EQ(res.posts[1].score, 90);
}

TEST(Filter, RequireOutboundLink) {
    VectorConnector c({post_with(10), post_with(20, {"http://a"}), post_with(30), post_with(40, {"http://b", "http://c"})});
    auto res = list_posts(c, FilterConfig{{"happening"}, {}, 0, true});
    ASSERT_EQ(res.posts.size(), 2u);
    for (const auto& p : res.posts) EXPECT_FALSE(p.outbound_urls.empty());
}

TEST(Filter, RejectsEmptyFilter) {
    VectorConnector c({});
    EXPECT_THROW(list_posts(c, FilterConfig{}), ConfigError);
    EXPECT_THROW(list_posts(c, FilterConfig{{"x"}, {}, -1, false}), ConfigError);
}

TEST(Filter, FileCorpusTermMatchesSubstringScan) {
    FileCorpusConnector c(data_dir() / "corpus_small.jsonl");
    auto res = list_posts(c, FilterConfig{{"finale"}, {}, 0, false});
    // Oracle: case-insensitive substring scan over the well-formed, unique posts.
    SkipReport skips;
    std::vector<std::string> expected;
    for (const auto& p : c.fetch_candidates({}, skips)) {
        std::string hay = to_lower(p.title + "\n" + p.body);
        if (hay.find("finale") != std::string::npos) expected.push_back(p.post_id);
    }
    std::vector<std::string> got;
    for (const auto& p : res.posts) got.push_back(p.post_id);
    EXPECT_EQ(got, expected);
    EXPECT_EQ(got, (std::vector<std::string>{"p2", "p3"}));
    EXPECT_EQ(res.skips.skipped, 3u);  // non-JSON line, duplicate id, missing id
}

TEST(Filter, ListPostsIsBruteForceFilter) {
    std::mt19937_64 rng(17);
    const std::vector<std::string> words{"final", "finale", "launch", "patch", "Concert", "quiet"};
    const std::vector<std::string> communities{"soccer", "tv", "gaming", "music"};
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<RawPost> posts(40);
        for (std::size_t i = 0; i < posts.size(); ++i) {
            auto& p = posts[i];
            p.post_id = "q" + std::to_string(i);
            p.community = communities[rng() % communities.size()];
            p.title = words[rng() % words.size()] + " " + words[rng() % words.size()];
            p.body = words[rng() % words.size()];
            p.score = static_cast<std::int64_t>(rng() % 200);
            if (rng() % 2) p.outbound_urls = {"http://x"};
        }
        FilterConfig f{{words[rng() % words.size()]}, {communities[rng() % communities.size()]},
                       static_cast<std::int64_t>(rng() % 150), rng() % 2 == 0};
        VectorConnector c(posts);
        auto res = list_posts(c, f);
        std::vector<std::string> expect;
        for (const auto& p : posts) {
            bool term = to_lower(p.title).find(to_lower(f.search_terms[0])) != std::string::npos ||
                        to_lower(p.body).find(to_lower(f.search_terms[0])) != std::string::npos;
            bool comm = p.community == f.communities[0];
            if ((term || comm) && p.score >= f.min_engagement && (!f.require_outbound_link || !p.outbound_urls.empty()))
                expect.push_back(p.post_id);
        }
        std::vector<std::string> got;
        for (const auto& p : res.posts) got.push_back(p.post_id);
        EXPECT_EQ(got, expect);
    }
}

TEST(FetchLinkedPages, NoLinksNoPages) {
    MapPageFetcher f(std::map<std::string, std::string>{});
    auto res = fetch_linked_pages(post_with(1), f, 3);
    EXPECT_TRUE(res.pages.empty());
    EXPECT_TRUE(res.failures.empty());
}

TEST(FetchLinkedPages, TruncatesToMaxPagesInOrder) {
    MapPageFetcher f({{"http://a", "A"}, {"http://b", "B"}, {"http://c", "C"}});
    auto res = fetch_linked_pages(post_with(1, {"http://a", "http://b", "http://c"}), f, 2);
    ASSERT_EQ(res.pages.size(), 2u);
    EXPECT_EQ(res.pages[0].url, "http://a");
    EXPECT_EQ(res.pages[1].url, "http://b");
    EXPECT_THROW(fetch_linked_pages(post_with(1), f, -1), ConfigError);
}

TEST(FetchLinkedPages, FailuresRecordedNotFatal) {
    MapPageFetcher f(std::map<std::string, std::string>{{"http://a", "A"}});
    auto res = fetch_linked_pages(post_with(1, {"http://gone", "http://a"}), f, 5);
    ASSERT_EQ(res.pages.size(), 1u);
    ASSERT_EQ(res.failures.size(), 1u);
    EXPECT_EQ(res.failures[0].url, "http://gone");
}

TEST(FetchLinkedPages, FixtureServerBodiesAreByteEqual) {
    const std::string finale = slurp(data_dir() / "pages" / "finale.html");
    const std::string schedule = slurp(data_dir() / "pages" / "schedule.html");
    FixtureServer server([&](httplib::Server& s) {
        s.Get("/finale", [&](const httplib::Request&, httplib::Response& r) { r.set_content(finale, "text/html"); });
        s.Get("/schedule", [&](const httplib::Request&, httplib::Response& r) { r.set_content(schedule, "text/html"); });
    });
    HttpPageFetcher fetcher(5);
    auto post = post_with(1, {server.origin() + "/finale", server.origin() + "/nope", server.origin() + "/schedule"});
    auto res = fetch_linked_pages(post, fetcher, 3, 2);
    ASSERT_EQ(res.pages.size(), 2u);
    EXPECT_EQ(res.pages[0].raw_html, finale);
    EXPECT_EQ(res.pages[1].raw_html, schedule);
    ASSERT_EQ(res.failures.size(), 1u);
    EXPECT_EQ(res.failures[0].error, "HTTP 404");
}

TEST(CleanText, StripsTags) {
    EXPECT_EQ(clean_text("<p>Hello <b>world</b></p>", TextFormat::html), "Hello world");
}

TEST(CleanText, PlainIsIdentityModuloWhitespace) {
    EXPECT_EQ(clean_text("  a  b\n\tc <p> ", TextFormat::plain), "a b c <p>");
}

TEST(CleanText, NewsPageMatchesHandCleanedGolden) {
    EXPECT_EQ(clean_text(slurp(data_dir() / "news_page.html"), TextFormat::html),
              slurp(data_dir() / "news_page.golden.txt"));
}

TEST(CleanText, MarkdownLinksEmphasisAndLists) {
    EXPECT_EQ(clean_text("# Title\n\n**Bold** and [link text](http://x) &amp; ~~gone~~\n- item one\n1. item two",
                         TextFormat::markdown),
              "Title Bold and link text & gone item one item two");
}

TEST(CleanText, TruncatesTailWithoutBreakingUtf8) {
    EXPECT_EQ(clean_text("abcdef", TextFormat::plain, 4), "abcd");
    EXPECT_EQ(clean_text("ab\xc3\xa9", TextFormat::plain, 3), "ab");
    EXPECT_EQ(clean_text("<div><p>unterminated <b", TextFormat::html), "unterminated");
}

TEST(Assemble, TopKCommentsByScore) {
    RawPost p = post_with(5);
    for (int i = 0; i < 10; ++i) p.comments_raw.push_back({"comment " + std::to_string(i), i * 10});
    AssembleOptions opts;
    opts.top_k_comments = 5;
    auto res = assemble_content_record(p, {}, opts);
    ASSERT_TRUE(res.record);
    EXPECT_EQ(res.record->comments,
              (std::vector<std::string>{"comment 9", "comment 8", "comment 7", "comment 6", "comment 5"}));
}

TEST(Assemble, EmptyBodyWithCommentIsValid) {
    RawPost p = post_with(5);
    p.body = "";
    p.comments_raw = {{"only comment", 3}};
    auto res = assemble_content_record(p, {});
    ASSERT_TRUE(res.record);
    EXPECT_NO_THROW(validate(*res.record));
}

TEST(Assemble, EmptyRecordDiscardedWithReason) {
    RawPost p = post_with(5);
    p.title = "";
    p.body = "<br>";
    auto res = assemble_content_record(p, {});
    EXPECT_FALSE(res.record);
    EXPECT_NE(res.discard_reason.find(p.post_id), std::string::npos);
}

TEST(Assemble, RespectsCaps) {
    RawPost p = post_with(5);
    p.body = std::string(5000, 'x');
    p.comments_raw = {{std::string(3000, 'y'), 10}, {std::string(3000, 'z'), 5}};
    AssembleOptions opts;
    opts.record_max_chars = 6000;
    auto res = assemble_content_record(p, {{"http://a", "<p>" + std::string(100, 'w') + "</p>"}}, opts);
    ASSERT_TRUE(res.record);
    const auto& r = *res.record;
    EXPECT_EQ(r.comments.size(), 1u);
    EXPECT_EQ(r.comments[0].size(), 6000 - r.title.size() - 5000);
    EXPECT_TRUE(r.linked_texts.empty());
}

TEST(Assemble, FullThreadMatchesGoldenRecord) {
    auto post = Json::parse(slurp(data_dir() / "thread_fixture.json")).get<RawPost>();
    DirectoryPageFetcher fetcher(data_dir() / "pages");
    auto linked = fetch_linked_pages(post, fetcher, 3);
    EXPECT_EQ(linked.failures.size(), 1u);
    auto res = assemble_content_record(post, linked.pages);
    ASSERT_TRUE(res.record);
    const std::string line = Json(*res.record).dump() + "\n";
    EXPECT_EQ(line, slurp(data_dir() / "thread_record.golden.jsonl"));
    // Deterministic.
    EXPECT_EQ(assemble_content_record(post, linked.pages).record, res.record);
}

TEST(RateLimiter, TokenBucketSpacing) {
    RateLimiter limiter(60.0);  // one per second, burst 1
    auto t0 = RateLimiter::Clock::now();
    EXPECT_EQ(limiter.try_acquire(t0), RateLimiter::Clock::duration::zero());
    auto wait = limiter.try_acquire(t0);
    EXPECT_GT(wait, std::chrono::milliseconds(990));
    EXPECT_LE(wait, std::chrono::milliseconds(1000));
    EXPECT_EQ(limiter.try_acquire(t0 + std::chrono::milliseconds(1001)), RateLimiter::Clock::duration::zero());
    EXPECT_THROW(RateLimiter(0), ConfigError);
}

TEST(RateLimiter, BackoffDoublesAndCaps) {
    BackoffPolicy b{5, std::chrono::milliseconds(100), std::chrono::milliseconds(350)};
    EXPECT_EQ(b.delay(0).count(), 100);
    EXPECT_EQ(b.delay(1).count(), 200);
    EXPECT_EQ(b.delay(2).count(), 350);
}

TEST(HttpConnector, PaginatesRetriesAndFilters) {
    std::atomic<int> calls{0};
    std::string auth_seen;
    FixtureServer server([&](httplib::Server& s) {
        s.Get("/posts", [&](const httplib::Request& req, httplib::Response& r) {
            if (calls++ == 0) {  // first call fails transiently
                r.status = 503;
                return;
            }
            auth_seen = req.get_header_value("Authorization");
            Json body;
            if (!req.has_param("after")) {
                body["posts"] = Json::array({Json(post_with(70)), Json(post_with(10))});
                body["next"] = "c2";
            } else {
                body["posts"] = Json::array({Json(post_with(80)), Json{{"bad", true}}});
                body["next"] = nullptr;
            }
            r.set_content(body.dump(), "application/json");
        });
    });
    ::setenv("SPIKECAST_TEST_TOKEN", "sekret", 1);
    HttpConnectorConfig cfg;
    cfg.base_url = server.origin();
    cfg.auth_token_env = "SPIKECAST_TEST_TOKEN";
    cfg.requests_per_minute = 6000;
    cfg.backoff = {2, std::chrono::milliseconds(10), std::chrono::milliseconds(50)};
    HttpJsonConnector connector(cfg);
    auto res = list_posts(connector, FilterConfig{{}, {"misc"}, 50, false});
    ASSERT_EQ(res.posts.size(), 2u);
    EXPECT_EQ(res.posts[1].score, 80);
    EXPECT_EQ(res.skips.skipped, 1u);
    EXPECT_EQ(calls.load(), 3);
    EXPECT_EQ(auth_seen, "Bearer sekret");
}

TEST(HttpConnector, UnreachableIsRetryableError) {
    HttpConnectorConfig cfg;
    cfg.base_url = "http://127.0.0.1:1";
    cfg.timeout_seconds = 1;
    cfg.requests_per_minute = 6000;
    cfg.backoff = {1, std::chrono::milliseconds(1), std::chrono::milliseconds(1)};
    HttpJsonConnector connector(cfg);
    try {
        list_posts(connector, FilterConfig{{"x"}, {}, 0, false});
        FAIL();
    } catch (const IoError& e) {
        EXPECT_TRUE(e.retryable());
    }
}

TEST(Ingest, CorpusEndToEnd) {
    FileCorpusConnector c(data_dir() / "corpus_small.jsonl");
    MapPageFetcher fetcher({{"http://news.example/finale", slurp(data_dir() / "news_page.html")}});
    auto res = ingest(c, FilterConfig{{}, {"television", "cooking", "gaming"}, 50, false}, &fetcher);
    ASSERT_EQ(res.records.size(), 3u);
    EXPECT_EQ(res.records[0].record_id, "rec-p2");
    ASSERT_EQ(res.records[0].linked_texts.size(), 1u);
    EXPECT_EQ(res.fetch_failures.size(), 1u);  // pancakes page unknown
    for (const auto& r : res.records) EXPECT_NO_THROW(validate(r));
}
