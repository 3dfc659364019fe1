#pragma once

#include <filesystem>
#include <set>
#include <string>

#include "spikecast/harness/pipeline.hpp"

namespace spikecast {

struct DatasetSummary {
    std::size_t samples = 0;
    std::size_t labels = 0;
    std::size_t posts = 0;
    std::size_t fixtures = 0;
    std::filesystem::path config;
};

// Pipeline config for a synthesized dataset; paths relative to its dir.
inline Json dataset_pipeline_json(const Scenario& s) {
    std::set<std::string> communities;
    for (const auto& p : s.planted_events) communities.insert(p.community);
    if (communities.empty()) communities.insert("events");
    Json regions = Json::object();
    for (const auto& n : s.networks) regions[n.id] = Json{{"country", n.country}, {"continent", n.continent}};
    return Json{{"out_dir", "out"},
                {"traffic", "traffic.csv"},
                {"labels", "labels.jsonl"},
                {"ingestion",
                 {{"connector", "file"},
                  {"corpus", "posts.jsonl"},
                  {"pages_dir", "pages"},
                  {"filter", {{"search_terms", s.search_terms}, {"communities", communities}, {"min_engagement", 0}}}}},
                {"inference", {{"backend", "stub"}, {"fixtures", "stub_fixtures.json"}, {"ensemble_size", 3}, {"max_attempts", 3}}},
                {"retrieval", {{"kind", "fixture"}, {"path", "wiki.jsonl"}, {"max_docs", 3}}},
                {"embedding", {{"kind", "hashing"}, {"dimension", 256}}},
                {"dedup", {{"threshold", kDefaultDuplicateThreshold}, {"max_rounds", 5}}},
                {"clustering", {{"levels", kDefaultLevels}, {"seed", s.seed}, {"restarts", 3}}},
                {"baseline", {{"window_weeks", 4}, {"bin_minutes", 5}, {"std_floor_fraction", s.std_floor_fraction}}},
                {"spikes", {{"z_threshold", 2.0}, {"min_duration_minutes", 20.0}, {"merge_gap_minutes", 5.0}}},
                {"correlation",
                 {{"window_hours", 6.0}, {"require_advance_notice", true}, {"feature_window_days", 3}, {"regions", regions}}},
                {"report", {{"z_bins", {2.0, 3.0, 5.0}}, {"min_category_count", 3}}}};
}

// Writes traffic.csv, labels.jsonl, posts.jsonl, pages/, wiki.jsonl,
// pipeline.json and stub_fixtures.json. The fixtures are recorded by running
// the pipeline once against the planted truth, so a stub replay sees exactly
// the prompts it was recorded with.
inline DatasetSummary write_synthetic_dataset(const Scenario& s, const std::filesystem::path& dir,
                                              const std::filesystem::path& prompt_dir = default_prompt_dir()) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    DatasetSummary sum;

    auto traffic = synth_traffic(s);
    write_traffic_csv(dir / "traffic.csv", traffic.series);
    write_jsonl(dir / "labels.jsonl", traffic.labels);
    for (const auto& t : traffic.series) sum.samples += t.size();
    sum.labels = traffic.labels.size();

    auto corpus = synth_corpus(s);
    write_jsonl(dir / "posts.jsonl", corpus.posts);
    sum.posts = corpus.posts.size();
    fs::remove_all(dir / "pages");
    fs::create_directories(dir / "pages");
    Json index = Json::object();
    std::size_t n = 0;
    for (const auto& [url, html] : corpus.pages) {
        const std::string name = "page" + std::to_string(++n) + ".html";
        index[url] = name;
        write_text(dir / "pages" / name, html);
    }
    write_text(dir / "pages" / "index.json", index.dump(2) + "\n");
    write_jsonl(dir / "wiki.jsonl", corpus.wiki);

    Json cfg_json = dataset_pipeline_json(s);
    sum.config = dir / "pipeline.json";
    write_text(sum.config, cfg_json.dump(2) + "\n");

    // Record fixtures from a truth-backed run in a scratch dir.
    write_text(dir / "stub_fixtures.json", "{}\n");
    PipelineConfig cfg = load_pipeline_config(sum.config);
    cfg.out_dir = dir / ".recording";
    cfg.prompt_dir = prompt_dir;
    PromptLibrary prompts(prompt_dir);
    PlantedTruthBackend truth(s, prompts);
    RecordingBackend recorder(truth);
    auto report = run_pipeline(cfg, &recorder);
    if (const auto* f = report.failed_stage())
        throw Error("fixture recording failed in stage " + f->name + ": " + f->error);
    Json fixtures = recorder.fixtures();
    sum.fixtures = fixtures.size();
    write_text(dir / "stub_fixtures.json", Json{{"fixtures", fixtures}}.dump(2) + "\n");
    fs::remove_all(cfg.out_dir);
    return sum;
}

}  // namespace spikecast
