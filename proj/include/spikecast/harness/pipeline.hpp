#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "spikecast/baseline/traffic_csv.hpp"
#include "spikecast/core/store.hpp"
#include "spikecast/correlation/coverage.hpp"
#include "spikecast/correlation/report.hpp"
#include "spikecast/dedup/embed.hpp"
#include "spikecast/harness/config.hpp"
#include "spikecast/harness/synth.hpp"

namespace spikecast {

// File names of the stage artifacts inside out_dir.
namespace artifact {
inline constexpr const char* kRecords = "records.jsonl";
inline constexpr const char* kEvents = "events.jsonl";
inline constexpr const char* kEventsFinal = "events_final.jsonl";
inline constexpr const char* kInferenceRuns = "inference_runs.jsonl";
inline constexpr const char* kEmbeddings = "embeddings.jsonl";
inline constexpr const char* kClusterModels = "cluster_models.json";
inline constexpr const char* kSpikes = "spikes.jsonl";
inline constexpr const char* kZScores = "zscores.csv";
inline constexpr const char* kMatches = "matches.jsonl";
inline constexpr const char* kFeatures = "features.csv";
inline constexpr const char* kCoverageCsv = "coverage.csv";
inline constexpr const char* kCoverageJson = "coverage.json";
inline constexpr const char* kLeadTime = "lead_time.csv";
inline constexpr const char* kSpikeFrequency = "spike_frequency.csv";
inline constexpr const char* kRunReport = "run_report.json";
inline constexpr const char* kTimings = "timings.json";
}  // namespace artifact

inline std::unique_ptr<LlmBackend> make_backend(const PipelineConfig& c) {
    if (c.backend == "http") return std::make_unique<HttpBackend>(c.http_backend);
    return std::make_unique<StubBackend>(StubBackend::from_file(c.stub_fixtures));
}

inline std::unique_ptr<RetrievalClient> make_retriever(const PipelineConfig& c) {
    if (c.retrieval == "fixture") return std::make_unique<FixtureRetriever>(FixtureRetriever::from_file(c.retrieval_fixture));
    if (c.retrieval == "http") return std::make_unique<HttpRetriever>(c.retrieval_url);
    return nullptr;
}

inline std::unique_ptr<Embedder> make_embedder(const PipelineConfig& c) {
    if (c.embedder == "fixture") return std::make_unique<FixtureEmbedder>(FixtureEmbedder::from_file(c.embedding_fixture));
    if (c.embedder == "http")
        return std::make_unique<HttpEmbedder>(c.embedding_url, c.embedding_model, 30, c.embedding_key_env);
    return std::make_unique<HashingEmbedder>(c.embedding_dimension, c.embedding_salt);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("short write to " + path.string());
}

// ---- ingestion -------------------------------------------------------------

inline Json stage_ingest(const PipelineConfig& c) {
    std::unique_ptr<SourceConnector> connector;
    if (c.connector == "http") connector = std::make_unique<HttpJsonConnector>(c.http_connector);
    else connector = std::make_unique<FileCorpusConnector>(c.corpus);
    std::unique_ptr<PageFetcher> fetcher;
    if (c.page_fetcher == "dir") fetcher = std::make_unique<DirectoryPageFetcher>(c.pages_dir);
    else if (c.page_fetcher == "http") fetcher = std::make_unique<HttpPageFetcher>();

    auto res = ingest(*connector, c.filter, fetcher.get(), c.ingest);
    write_jsonl(c.out_dir / artifact::kRecords, res.records);
    Json failures = Json::array();
    for (const auto& f : res.fetch_failures) failures.push_back(Json{{"url", f.url}, {"error", f.error}});
    return Json{{"posts_listed", res.posts_listed},
                {"records", res.records.size()},
                {"skipped", res.skips.skipped},
                {"skip_reasons", res.skips.reasons},
                {"discarded", res.discarded},
                {"fetch_failures", failures}};
}

// ---- inference -------------------------------------------------------------

struct InferenceContext {
    LlmBackend& llm;
    const RetrievalClient* retriever;
    const PromptLibrary& prompts;
    const PipelineConfig& config;
    std::map<std::string, ContentRecord> records;
};

inline std::string sources_for(const EventAbstraction& e, const InferenceContext& ctx) {
    std::vector<const ContentRecord*> recs;
    for (const auto& id : e.source_records)
        if (auto it = ctx.records.find(id); it != ctx.records.end()) recs.push_back(&it->second);
    return render_sources(recs, ctx.config.infer.records_char_cap);
}

// Infers every field of each event, several events at once; results keep
// input order so the store sees the same write sequence every run.
inline std::vector<EventInference> infer_events(std::vector<EventAbstraction>& events, const InferenceContext& ctx) {
    const std::size_t outer = std::max<std::size_t>(1, ctx.config.infer.max_in_flight);
    return bounded_parallel_map(events.size(), outer, [&](std::size_t i) {
        return infer_all_fields(events[i], sources_for(events[i], ctx), ctx.llm, ctx.retriever, ctx.prompts,
                                ctx.config.infer, ctx.config.enrich);
    });
}

inline void append_runs(const std::filesystem::path& path, const std::vector<EventInference>& results) {
    std::string payload;
    for (const auto& r : results)
        for (const auto& run : r.runs) payload += Json(run).dump() + "\n";
    if (!payload.empty()) append_atomically(path, payload);
}

inline Json stage_infer(const PipelineConfig& c, InferenceContext& ctx) {
    const auto records = read_jsonl<ContentRecord>(c.out_dir / artifact::kRecords);
    for (const auto& r : records) ctx.records[r.record_id] = r;
    std::filesystem::remove(c.out_dir / artifact::kEvents);
    std::filesystem::remove(c.out_dir / artifact::kInferenceRuns);
    write_text(c.out_dir / artifact::kInferenceRuns, "");

    struct Extracted {
        ExtractResult result;
        std::string error;
    };
    auto extracted = bounded_parallel_map(records.size(), std::max<std::size_t>(1, c.infer.max_in_flight), [&](std::size_t i) {
        Extracted x;
        try {
            x.result = extract_events(records[i], ctx.llm, ctx.prompts, c.extract);
        } catch (const MissingFixtureError&) {
            throw;
        } catch (const Error& e) {
            x.error = e.what();
        }
        return x;
    });

    EventStore store(c.out_dir / artifact::kEvents);
    Json diagnostics = Json::array();
    std::size_t failed_records = 0, drafts = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& x = extracted[i];
        if (!x.error.empty()) {
            ++failed_records;
            diagnostics.push_back(records[i].record_id + ": " + x.error);
            continue;
        }
        for (const auto& d : x.result.diagnostics) diagnostics.push_back(records[i].record_id + ": " + d);
        for (const auto& d : x.result.drafts) {
            ++drafts;
            try {
                store.append(build_event(d, records[i], c.default_utc_offset_minutes));
            } catch (const ValidationError& e) {
                diagnostics.push_back(records[i].record_id + ": dropped event: " + e.what());
            }
        }
    }

    auto events = store.current();
    auto results = infer_events(events, ctx);
    std::size_t failed_fields = 0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        store.update(events[i]);
        for (const auto& run : results[i].runs) failed_fields += run.failed();
        for (const auto& w : results[i].context.warnings) diagnostics.push_back(events[i].event_id + ": " + w);
    }
    append_runs(c.out_dir / artifact::kInferenceRuns, results);
    return Json{{"records", records.size()},  {"failed_records", failed_records}, {"drafts", drafts},
                {"events", events.size()},    {"failed_fields", failed_fields},   {"diagnostics", diagnostics}};
}

// ---- dedup + clustering ----------------------------------------------------

// Embed, merge duplicates, re-infer the survivors, repeat until a pass finds
// nothing (or the round limit is hit).
inline Json stage_dedup(const PipelineConfig& c, InferenceContext& ctx, Embedder& embedder) {
    if (ctx.records.empty())
        for (const auto& r : read_jsonl<ContentRecord>(c.out_dir / artifact::kRecords)) ctx.records[r.record_id] = r;
    EventStore store(c.out_dir / artifact::kEvents);
    Json warnings = Json::array();
    std::size_t merged = 0, groups = 0;
    int rounds = 0;
    EmbedBatch batch;
    for (;;) {
        batch = embed_events(store.current(), embedder, c.infer.max_in_flight);
        if (rounds == c.max_dedup_rounds) {
            warnings.push_back("dedup round limit reached; duplicates may remain");
            break;
        }
        ++rounds;
        auto report = dedup_pass(store, batch.embeddings, c.dedup_threshold);
        if (report.groups.empty()) break;
        groups += report.groups.size();
        merged += report.absorbed;
        std::vector<EventAbstraction> survivors;
        for (const auto& id : report.survivors) survivors.push_back(*store.find(id));
        auto results = infer_events(survivors, ctx);
        for (auto& s : survivors) store.update(s);
        append_runs(c.out_dir / artifact::kInferenceRuns, results);
    }
    for (const auto& w : batch.warnings) warnings.push_back(w);
    write_jsonl(c.out_dir / artifact::kEmbeddings, batch.embeddings);
    return Json{{"rounds", rounds},
                {"groups", groups},
                {"absorbed", merged},
                {"events", store.current().size()},
                {"unembedded", batch.unembedded},
                {"warnings", warnings}};
}

inline Json stage_cluster(const PipelineConfig& c) {
    EventStore store(c.out_dir / artifact::kEvents);
    const auto embeddings = read_jsonl<EventEmbedding>(c.out_dir / artifact::kEmbeddings);
    std::size_t assigned = 0;
    if (!embeddings.empty()) {
        auto res = cluster_multilevel(embeddings, c.levels, c.cluster_seed, c.cluster_restarts);
        save_models(c.out_dir / artifact::kClusterModels, res.models);
        for (auto e : store.current()) {
            auto it = res.signatures.find(e.event_id);
            if (it == res.signatures.end()) continue;
            e.semantic_signature = it->second;
            e.stale_fields.erase("semantic_signature");
            store.update(e);
            ++assigned;
        }
    } else {
        std::filesystem::remove(c.out_dir / artifact::kClusterModels);
    }
    write_jsonl(c.out_dir / artifact::kEventsFinal, store.current());
    return Json{{"embeddings", embeddings.size()}, {"signatures", assigned}, {"levels", c.levels}};
}

// ---- traffic ---------------------------------------------------------------

inline std::vector<ZSeries> score_traffic(const PipelineConfig& c) {
    std::vector<ZSeries> out;
    for (const auto& [net, series] : read_traffic_csv(c.traffic)) out.push_back(rolling_zscore(series, c.baseline));
    return out;
}

inline Json stage_spikes(const PipelineConfig& c) {
    const auto zs = score_traffic(c);
    std::filesystem::remove(c.out_dir / artifact::kSpikes);
    JsonlStore<SpikeRecord> store(c.out_dir / artifact::kSpikes);
    std::string csv = "timestamp_utc,network_id,z\n";
    std::size_t count = 0;
    for (const auto& z : zs) {
        for (auto& s : detect_spikes(z, c.spikes)) {
            store.append(std::move(s));
            ++count;
        }
        for (std::size_t i = 0; i < z.z_values.size(); ++i)
            csv += format_utc(z.time_at(i)) + "," + z.network_id + "," + format_real(z.z_values[i]) + "\n";
    }
    if (count == 0) write_text(c.out_dir / artifact::kSpikes, "");
    write_text(c.out_dir / artifact::kZScores, csv);
    return Json{{"networks", zs.size()}, {"spikes", count}};
}

// ---- correlation + reports -------------------------------------------------

inline std::vector<EventAbstraction> final_events(const PipelineConfig& c) {
    return EventStore(c.out_dir / artifact::kEvents).current();
}

inline Json stage_correlate(const PipelineConfig& c) {
    const auto spikes = read_jsonl<SpikeRecord>(c.out_dir / artifact::kSpikes);
    const auto events = final_events(c);
    auto res = match_spikes_to_events(spikes, events, c.match);
    write_jsonl(c.out_dir / artifact::kMatches, res.matches);
    auto table = export_features(events, score_traffic(c), c.levels, c.features);
    write_text(c.out_dir / artifact::kFeatures, table.to_csv());
    std::set<std::string> matched_spikes;
    for (const auto& m : res.matches) matched_spikes.insert(m.spike.spike_id);
    Json warnings = res.warnings;
    for (const auto& w : table.warnings) warnings.push_back(w);
    return Json{{"matches", res.matches.size()},
                {"matched_spikes", matched_spikes.size()},
                {"feature_rows", table.rows.size()},
                {"warnings", warnings}};
}

// Spike labels from planted ground truth: a spike overlapping a planted,
// announced event is event-driven; one overlapping only spontaneous plants is
// tracked separately (it cannot be forecast); anything else is noise.
struct SpikeTruth {
    std::vector<LabeledSpike> labeled;
    std::size_t spontaneous_spikes = 0, spontaneous_matched = 0;
    std::size_t planted = 0, planted_detected = 0;
};

inline SpikeTruth label_spikes(const std::vector<SpikeRecord>& spikes, const std::vector<SynthLabel>& labels,
                               const std::vector<SpikeEventMatch>& matches) {
    auto overlaps = [](const SpikeRecord& s, const SynthLabel& l) {
        return s.network_id == l.network_id && s.start < l.end && l.start < s.end;
    };
    std::set<std::string> matched;
    for (const auto& m : matches) matched.insert(m.spike.spike_id);
    SpikeTruth t;
    for (const auto& s : spikes) {
        bool announced = false, spontaneous = false;
        for (const auto& l : labels)
            if (overlaps(s, l)) (l.spontaneous ? spontaneous : announced) = true;
        t.labeled.push_back({s, announced});
        if (spontaneous && !announced) {
            ++t.spontaneous_spikes;
            t.spontaneous_matched += matched.count(s.spike_id);
        }
    }
    for (const auto& l : labels) {
        ++t.planted;
        t.planted_detected += std::any_of(spikes.begin(), spikes.end(), [&](const SpikeRecord& s) { return overlaps(s, l); });
    }
    return t;
}

inline Json stage_report(const PipelineConfig& c) {
    const auto spikes = read_jsonl<SpikeRecord>(c.out_dir / artifact::kSpikes);
    const auto matches = read_jsonl<SpikeEventMatch>(c.out_dir / artifact::kMatches);
    const auto events = final_events(c);
    Json out = Json::object();

    if (c.labels) {
        auto truth = label_spikes(spikes, read_jsonl<SynthLabel>(*c.labels), matches);
        auto cov = coverage(truth.labeled, matches);
        write_text(c.out_dir / artifact::kCoverageCsv, coverage_report(cov, ReportFormat::csv));
        write_text(c.out_dir / artifact::kCoverageJson, coverage_report(cov, ReportFormat::json));
        out["coverage"] = Json{{"event_driven_spikes", cov.overall.labeled},
                               {"matched", cov.overall.matched},
                               {"fraction", cov.overall.fraction()}};
        out["spontaneous"] = Json{{"spikes", truth.spontaneous_spikes}, {"matched", truth.spontaneous_matched}};
        out["planted"] = Json{{"intervals", truth.planted}, {"detected", truth.planted_detected}};
    } else {
        out["coverage"] = nullptr;
        out["notes"] = Json::array({"no labels configured; coverage not computed"});
    }

    auto leads = lead_time_cdf(events, true, c.min_category_count);
    write_text(c.out_dir / artifact::kLeadTime, lead_time_report(leads, ReportFormat::csv));
    Json lead_summary = Json::object();
    for (const auto& [cat, cdf] : leads.categories)
        lead_summary[cat] = Json{{"events", cdf.leads_days.size()}, {"share_lead_ge_30d", fraction_with_lead_at_least(cdf, 30.0)}};
    out["lead_time"] = lead_summary;

    auto hist = spike_frequency(spikes, c.z_bins);
    write_text(c.out_dir / artifact::kSpikeFrequency, spike_frequency_report(hist, ReportFormat::csv));
    out["spike_frequency"] = Json::array();
    for (const auto& [b, n] : hist) out["spike_frequency"].push_back(Json{{"z", b}, {"count", n}});
    return out;
}

// ---- orchestration ---------------------------------------------------------

struct StageOutcome {
    explicit StageOutcome(std::string n = {}) : name(std::move(n)) {}

    std::string name;
    std::string status = "skipped";  // ok | failed | skipped
    Json details = Json::object();
    std::string error;
    std::string missing_fixture;  // prompt hash, when a stub fixture was missing
    double seconds = 0;
};

struct RunReport {
    std::vector<StageOutcome> stages;

    bool ok() const {
        return std::all_of(stages.begin(), stages.end(), [](const StageOutcome& s) { return s.status == "ok"; });
    }
    const StageOutcome* failed_stage() const {
        for (const auto& s : stages)
            if (s.status == "failed") return &s;
        return nullptr;
    }
    const StageOutcome& stage(const std::string& name) const {
        for (const auto& s : stages)
            if (s.name == name) return s;
        throw PreconditionError("no stage named " + name);
    }

    // Timings are kept out so the report is byte-stable across runs.
    Json to_json() const {
        Json stages_j = Json::array();
        for (const auto& s : stages) {
            Json j{{"name", s.name}, {"status", s.status}, {"details", s.details}};
            if (!s.error.empty()) j["error"] = s.error;
            if (!s.missing_fixture.empty()) j["missing_fixture"] = s.missing_fixture;
            stages_j.push_back(std::move(j));
        }
        Json j{{"schema_version", kSchemaVersion}, {"status", ok() ? "ok" : "failed"}, {"stages", stages_j}};
        if (const auto* f = failed_stage()) j["failed_stage"] = f->name;
        return j;
    }

    Json timings() const {
        Json j = Json::object();
        for (const auto& s : stages) j[s.name] = s.seconds;
        return j;
    }
};

inline const std::vector<std::string>& pipeline_stage_names() {
    static const std::vector<std::string> names{"ingest", "infer", "dedup", "cluster",
                                                "detect-spikes", "correlate", "report"};
    return names;
}

// Runs named stages against out_dir, building the backend, retriever and
// embedder on first use. `llm` overrides the configured backend (fixture
// recording uses this).
class StageRunner {
public:
    explicit StageRunner(const PipelineConfig& c, LlmBackend* llm = nullptr) : c_(c), llm_(llm) {
        std::filesystem::create_directories(c_.out_dir);
    }

    StageOutcome run(const std::string& name) {
        StageOutcome stage{name};
        const auto t0 = std::chrono::steady_clock::now();
        try {
            stage.details = body(name);
            stage.status = "ok";
        } catch (const MissingFixtureError& e) {
            stage.status = "failed";
            stage.error = e.what();
            stage.missing_fixture = e.prompt_hash();
        } catch (const std::exception& e) {
            stage.status = "failed";
            stage.error = e.what();
        }
        stage.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return stage;
    }

private:
    InferenceContext& context() {
        if (!ctx_) {
            if (!llm_) {
                owned_ = make_backend(c_);
                llm_ = owned_.get();
            }
            retriever_ = make_retriever(c_);
            prompts_ = std::make_unique<PromptLibrary>(c_.prompt_dir);
            ctx_ = std::make_unique<InferenceContext>(InferenceContext{*llm_, retriever_.get(), *prompts_, c_, {}});
        }
        return *ctx_;
    }

    Json body(const std::string& name) {
        if (name == "ingest") return stage_ingest(c_);
        if (name == "infer") return stage_infer(c_, context());
        if (name == "dedup") {
            if (!embedder_) embedder_ = make_embedder(c_);
            return stage_dedup(c_, context(), *embedder_);
        }
        if (name == "cluster") return stage_cluster(c_);
        if (name == "detect-spikes") return stage_spikes(c_);
        if (name == "correlate") return stage_correlate(c_);
        if (name == "report") return stage_report(c_);
        throw ConfigError("unknown stage '" + name + "'");
    }

    const PipelineConfig& c_;
    LlmBackend* llm_;
    std::unique_ptr<LlmBackend> owned_;
    std::unique_ptr<RetrievalClient> retriever_;
    std::unique_ptr<Embedder> embedder_;
    std::unique_ptr<PromptLibrary> prompts_;
    std::unique_ptr<InferenceContext> ctx_;
};

// Runs every stage in order, each reading the previous stages' files from
// out_dir. The first failure stops the run; the artifacts written so far
// stay, later stages are reported as skipped, and run_report.json records
// what happened.
inline RunReport run_pipeline(const PipelineConfig& c, LlmBackend* llm = nullptr) {
    std::filesystem::create_directories(c.out_dir);
    for (const char* f : {artifact::kRecords, artifact::kEvents, artifact::kEventsFinal, artifact::kInferenceRuns,
                          artifact::kEmbeddings, artifact::kClusterModels, artifact::kSpikes, artifact::kZScores,
                          artifact::kMatches, artifact::kFeatures, artifact::kCoverageCsv, artifact::kCoverageJson,
                          artifact::kLeadTime, artifact::kSpikeFrequency, artifact::kRunReport, artifact::kTimings})
        std::filesystem::remove(c.out_dir / f);

    RunReport report;
    StageRunner runner(c, llm);
    bool halted = false;
    for (const auto& name : pipeline_stage_names()) {
        if (halted) {
            report.stages.push_back(StageOutcome{name});
            continue;
        }
        report.stages.push_back(runner.run(name));
        halted = report.stages.back().status == "failed";
    }
    write_text(c.out_dir / artifact::kRunReport, report.to_json().dump(2) + "\n");
    write_text(c.out_dir / artifact::kTimings, report.timings().dump(2) + "\n");
    return report;
}

}  // namespace spikecast
