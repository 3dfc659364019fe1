#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spikecast/baseline/baseline.hpp"
#include "spikecast/baseline/spikes.hpp"
#include "spikecast/correlation/features.hpp"
#include "spikecast/correlation/lead_time.hpp"
#include "spikecast/correlation/match.hpp"
#include "spikecast/dedup/dedup.hpp"
#include "spikecast/dedup/multilevel.hpp"
#include "spikecast/inference/backend.hpp"
#include "spikecast/inference/extract.hpp"
#include "spikecast/inference/infer.hpp"
#include "spikecast/ingestion/connector.hpp"
#include "spikecast/ingestion/ingest.hpp"

namespace spikecast {

// Everything one end-to-end run needs. Relative paths in the JSON file are
// resolved against the file's directory.
struct PipelineConfig {
    std::filesystem::path out_dir = "out";
    std::filesystem::path traffic;
    std::optional<std::filesystem::path> labels;

    // ingestion
    std::string connector = "file";  // file | http
    std::filesystem::path corpus;
    HttpConnectorConfig http_connector;
    std::string page_fetcher = "none";  // none | dir | http
    std::filesystem::path pages_dir;
    FilterConfig filter;
    IngestOptions ingest;

    // inference
    std::string backend = "stub";  // stub | http
    std::filesystem::path stub_fixtures;
    HttpBackendConfig http_backend;
    std::filesystem::path prompt_dir = default_prompt_dir();
    InferOptions infer;
    ExtractOptions extract;
    int default_utc_offset_minutes = 0;

    // retrieval
    std::string retrieval = "none";  // none | fixture | http
    std::filesystem::path retrieval_fixture;
    std::string retrieval_url;
    EnrichOptions enrich;

    // embedding + dedup + clustering
    std::string embedder = "hashing";  // hashing | fixture | http
    std::size_t embedding_dimension = 256;
    std::uint64_t embedding_salt = 0;
    std::filesystem::path embedding_fixture;
    std::string embedding_url, embedding_model, embedding_key_env;
    double dedup_threshold = kDefaultDuplicateThreshold;
    int max_dedup_rounds = 5;
    std::vector<int> levels = kDefaultLevels;
    std::uint64_t cluster_seed = 1;
    int cluster_restarts = 3;

    // traffic
    RollingOptions baseline;
    SpikeDetectConfig spikes;

    // correlation + reports
    MatchOptions match{6.0, true};
    FeatureOptions features;
    std::vector<double> z_bins{2.0, 3.0, 5.0};
    int min_category_count = kDefaultMinCategoryCount;
};

namespace detail {

inline void reject_unknown_keys(const Json& j, const std::set<std::string>& known, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace detail

inline void validate(const PipelineConfig& c) {
    if (c.traffic.empty()) throw ConfigError("traffic path is required");
    if (c.connector != "file" && c.connector != "http") throw ConfigError("connector must be file or http");
    if (c.connector == "file" && c.corpus.empty()) throw ConfigError("ingestion.corpus is required for the file connector");
    if (c.connector == "http" && c.http_connector.base_url.empty()) throw ConfigError("ingestion.http.base_url is required");
    if (c.page_fetcher != "none" && c.page_fetcher != "dir" && c.page_fetcher != "http")
        throw ConfigError("ingestion.page_fetcher must be none, dir or http");
    validate(c.filter);
    if (c.backend != "stub" && c.backend != "http") throw ConfigError("inference.backend must be stub or http");
    if (c.backend == "stub" && c.stub_fixtures.empty()) throw ConfigError("inference.fixtures is required for the stub backend");
    if (c.backend == "http") validate(c.http_backend);
    validate(c.infer);
    if (c.retrieval != "none" && c.retrieval != "fixture" && c.retrieval != "http")
        throw ConfigError("retrieval.kind must be none, fixture or http");
    if (c.embedder != "hashing" && c.embedder != "fixture" && c.embedder != "http")
        throw ConfigError("embedding.kind must be hashing, fixture or http");
    if (!(c.dedup_threshold > -1.0 && c.dedup_threshold <= 1.0)) throw ConfigError("dedup.threshold must be in (-1, 1]");
    if (c.max_dedup_rounds < 1) throw ConfigError("dedup.max_rounds must be >= 1");
    if (c.levels.empty()) throw ConfigError("clustering.levels must not be empty");
    for (int k : c.levels)
        if (k < 1) throw ConfigError("clustering levels must be >= 1");
    if (c.cluster_restarts < 1) throw ConfigError("clustering.restarts must be >= 1");
    check_bin_minutes(c.baseline.bin_minutes);
    if (c.baseline.window_weeks < 1) throw ConfigError("baseline.window_weeks must be >= 1");
    validate(c.spikes);
    validate(c.match);
    if (c.features.window_days <= 0) throw ConfigError("correlation.feature_window_days must be > 0");
    if (c.z_bins.empty()) throw ConfigError("report.z_bins must not be empty");
    for (std::size_t i = 1; i < c.z_bins.size(); ++i)
        if (!(c.z_bins[i] > c.z_bins[i - 1])) throw ConfigError("report.z_bins must be strictly increasing");
}

inline PipelineConfig parse_pipeline_config(const Json& j, const std::filesystem::path& base_dir) {
    using detail::resolve;
    detail::reject_unknown_keys(j, {"out_dir", "traffic", "labels", "ingestion", "inference", "retrieval", "embedding",
                                    "dedup", "clustering", "baseline", "spikes", "correlation", "report"},
                                "pipeline config");
    PipelineConfig c;
    c.out_dir = resolve(base_dir, j.value("out_dir", "out"));
    c.traffic = resolve(base_dir, j.at("traffic").get<std::string>());
    if (j.contains("labels") && !j["labels"].is_null()) c.labels = resolve(base_dir, j["labels"].get<std::string>());

    const Json in = j.value("ingestion", Json::object());
    detail::reject_unknown_keys(in, {"connector", "corpus", "http", "page_fetcher", "pages_dir", "filter", "max_pages",
                                     "max_in_flight", "top_k_comments", "record_max_chars"},
                                "ingestion");
    c.connector = in.value("connector", "file");
    if (in.contains("corpus")) c.corpus = resolve(base_dir, in["corpus"].get<std::string>());
    if (in.contains("http")) {
        const Json& h = in["http"];
        c.http_connector.base_url = h.value("base_url", "");
        c.http_connector.path = h.value("path", "/posts");
        c.http_connector.auth_token_env = h.value("auth_token_env", "");
        c.http_connector.requests_per_minute = h.value("requests_per_minute", 60.0);
        c.http_connector.timeout_seconds = h.value("timeout_seconds", 30);
        c.http_connector.max_pages = h.value("max_pages", 100);
        c.http_connector.backoff.max_retries = h.value("max_retries", 3);
    }
    c.page_fetcher = in.value("page_fetcher", in.contains("pages_dir") ? "dir" : "none");
    if (in.contains("pages_dir")) c.pages_dir = resolve(base_dir, in["pages_dir"].get<std::string>());
    if (in.contains("filter")) {
        const Json& f = in["filter"];
        detail::reject_unknown_keys(f, {"search_terms", "communities", "min_engagement", "require_outbound_link"}, "filter");
        c.filter.search_terms = f.value("search_terms", std::vector<std::string>{});
        c.filter.communities = f.value("communities", std::vector<std::string>{});
        c.filter.min_engagement = f.value("min_engagement", std::int64_t{0});
        c.filter.require_outbound_link = f.value("require_outbound_link", false);
    }
    c.ingest.max_pages = in.value("max_pages", 3);
    c.ingest.max_in_flight = in.value("max_in_flight", std::size_t{8});
    c.ingest.assemble.top_k_comments = in.value("top_k_comments", std::size_t{20});
    c.ingest.assemble.record_max_chars = in.value("record_max_chars", std::size_t{60000});

    const Json inf = j.value("inference", Json::object());
    detail::reject_unknown_keys(inf, {"backend", "fixtures", "http", "prompt_dir", "ensemble_size", "max_attempts",
                                      "max_in_flight", "backend_retries", "temperature", "max_tokens",
                                      "records_char_cap", "default_utc_offset_minutes"},
                                "inference");
    c.backend = inf.value("backend", "stub");
    if (inf.contains("fixtures")) c.stub_fixtures = resolve(base_dir, inf["fixtures"].get<std::string>());
    if (inf.contains("http")) {
        const Json& h = inf["http"];
        c.http_backend.endpoint_url = h.value("endpoint_url", "");
        c.http_backend.model_name = h.value("model_name", "");
        c.http_backend.timeout_seconds = h.value("timeout_seconds", 120);
        c.http_backend.api_key_env = h.value("api_key_env", "");
    }
    if (inf.contains("prompt_dir")) c.prompt_dir = resolve(base_dir, inf["prompt_dir"].get<std::string>());
    c.infer.ensemble_size = inf.value("ensemble_size", 3);
    c.infer.max_attempts = inf.value("max_attempts", 3);
    c.infer.max_in_flight = inf.value("max_in_flight", std::size_t{4});
    c.infer.backend_retries = inf.value("backend_retries", 2);
    c.infer.temperature = inf.value("temperature", 0.6);
    c.infer.max_tokens = inf.value("max_tokens", 2048);
    c.infer.records_char_cap = inf.value("records_char_cap", std::size_t{6000});
    c.extract.temperature = c.infer.temperature;
    c.extract.max_tokens = c.infer.max_tokens;
    c.extract.max_retries = c.infer.backend_retries;
    c.http_backend.temperature = c.infer.temperature;
    c.http_backend.max_output_tokens = c.infer.max_tokens;
    c.default_utc_offset_minutes = inf.value("default_utc_offset_minutes", 0);

    const Json ret = j.value("retrieval", Json::object());
    detail::reject_unknown_keys(ret, {"kind", "path", "url", "max_docs", "doc_char_cap"}, "retrieval");
    c.retrieval = ret.value("kind", "none");
    if (ret.contains("path")) c.retrieval_fixture = resolve(base_dir, ret["path"].get<std::string>());
    c.retrieval_url = ret.value("url", "");
    c.enrich.max_docs = ret.value("max_docs", std::size_t{3});
    c.enrich.doc_char_cap = ret.value("doc_char_cap", std::size_t{1500});

    const Json emb = j.value("embedding", Json::object());
    detail::reject_unknown_keys(emb, {"kind", "dimension", "salt", "path", "url", "model", "api_key_env"}, "embedding");
    c.embedder = emb.value("kind", "hashing");
    c.embedding_dimension = emb.value("dimension", std::size_t{256});
    c.embedding_salt = emb.value("salt", std::uint64_t{0});
    if (emb.contains("path")) c.embedding_fixture = resolve(base_dir, emb["path"].get<std::string>());
    c.embedding_url = emb.value("url", "");
    c.embedding_model = emb.value("model", "");
    c.embedding_key_env = emb.value("api_key_env", "");

    const Json dd = j.value("dedup", Json::object());
    detail::reject_unknown_keys(dd, {"threshold", "max_rounds"}, "dedup");
    c.dedup_threshold = dd.value("threshold", kDefaultDuplicateThreshold);
    c.max_dedup_rounds = dd.value("max_rounds", 5);

    const Json cl = j.value("clustering", Json::object());
    detail::reject_unknown_keys(cl, {"levels", "seed", "restarts"}, "clustering");
    c.levels = cl.value("levels", kDefaultLevels);
    c.cluster_seed = cl.value("seed", std::uint64_t{1});
    c.cluster_restarts = cl.value("restarts", 3);

    const Json bl = j.value("baseline", Json::object());
    detail::reject_unknown_keys(bl, {"window_weeks", "bin_minutes", "std_floor_fraction"}, "baseline");
    c.baseline.window_weeks = bl.value("window_weeks", 4);
    c.baseline.bin_minutes = bl.value("bin_minutes", 5);
    c.baseline.std_floor_fraction = bl.value("std_floor_fraction", kDefaultStdFloorFraction);

    const Json sp = j.value("spikes", Json::object());
    detail::reject_unknown_keys(sp, {"z_threshold", "min_duration_minutes", "merge_gap_minutes"}, "spikes");
    c.spikes.z_threshold = sp.value("z_threshold", 2.0);
    c.spikes.min_duration_minutes = sp.value("min_duration_minutes", 20.0);
    c.spikes.merge_gap_minutes = sp.value("merge_gap_minutes", 5.0);

    const Json co = j.value("correlation", Json::object());
    detail::reject_unknown_keys(co, {"window_hours", "require_advance_notice", "feature_window_days", "regions"},
                                "correlation");
    c.match.window_hours = co.value("window_hours", 6.0);
    c.match.require_advance_notice = co.value("require_advance_notice", true);
    c.features.window_days = co.value("feature_window_days", 3);
    if (co.contains("regions"))
        for (const auto& [net, r] : co["regions"].items())
            c.features.regions[net] = NetworkRegion{r.value("country", ""), r.value("continent", "")};

    const Json rp = j.value("report", Json::object());
    detail::reject_unknown_keys(rp, {"z_bins", "min_category_count"}, "report");
    c.z_bins = rp.value("z_bins", std::vector<double>{2.0, 3.0, 5.0});
    c.min_category_count = rp.value("min_category_count", kDefaultMinCategoryCount);

    validate(c);
    return c;
}

inline PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open pipeline config " + path.string());
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError(path.string() + " is not valid JSON");
    return parse_pipeline_config(j, std::filesystem::absolute(path).parent_path());
}

}  // namespace spikecast
