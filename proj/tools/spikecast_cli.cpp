#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "spikecast/harness/dataset.hpp"

namespace sc = spikecast;

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

// Config from --config, or defaults rooted at --out-dir when there is none
// (enough for the traffic-only and report subcommands).
sc::PipelineConfig config_from(const std::string& config_path, const std::string& out_dir) {
    sc::PipelineConfig c;
    if (!config_path.empty()) c = sc::load_pipeline_config(config_path);
    if (!out_dir.empty()) c.out_dir = out_dir;
    return c;
}

int print_stage(const sc::StageOutcome& s) {
    sc::Json j{{"stage", s.name}, {"status", s.status}, {"details", s.details}};
    if (!s.error.empty()) j["error"] = s.error;
    if (!s.missing_fixture.empty()) j["missing_fixture"] = s.missing_fixture;
    std::cout << j.dump(2) << "\n";
    if (s.status != "ok") std::cerr << "spikecast: " << s.name << " failed: " << s.error << "\n";
    return s.status == "ok" ? 0 : kExitFailed;
}

std::string read_report(const sc::PipelineConfig& c, const std::string& kind, sc::ReportFormat fmt) {
    namespace a = sc::artifact;
    if (kind == "spike-frequency") {
        const auto spikes = sc::read_jsonl<sc::SpikeRecord>(c.out_dir / a::kSpikes);
        return sc::spike_frequency_report(sc::spike_frequency(spikes, c.z_bins), fmt);
    }
    if (kind == "lead-time")
        return sc::lead_time_report(sc::lead_time_cdf(sc::final_events(c), true, c.min_category_count), fmt);
    if (!c.labels) throw sc::ConfigError("coverage needs --labels (or labels in the config)");
    const auto spikes = sc::read_jsonl<sc::SpikeRecord>(c.out_dir / a::kSpikes);
    const auto matches = sc::read_jsonl<sc::SpikeEventMatch>(c.out_dir / a::kMatches);
    auto truth = sc::label_spikes(spikes, sc::read_jsonl<sc::SynthLabel>(*c.labels), matches);
    return sc::coverage_report(sc::coverage(truth.labeled, matches), fmt);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spikecast: forecast traffic spikes from online event discussion"};
    app.require_subcommand(1);

    std::string config, out_dir;

    // One subcommand per pipeline stage; each reads and writes out_dir.
    struct StageCmd {
        const char* cmd;
        const char* stage;
        const char* help;
    };
    const StageCmd stage_cmds[] = {
        {"ingest", "ingest", "Collect and filter discussion threads into records.jsonl"},
        {"infer-events", "infer", "Extract events from records and infer their metadata"},
        {"dedup", "dedup", "Embed events, merge duplicates, re-infer merged events"},
        {"cluster", "cluster", "Assign multi-level semantic signatures"},
        {"detect-spikes", "detect-spikes", "Score traffic against its weekly baseline and extract spikes"},
        {"correlate", "correlate", "Match spikes to events and export the feature table"},
    };
    std::string traffic;
    std::map<std::string, CLI::App*> subs;
    for (const auto& sc_cmd : stage_cmds) {
        auto* sub = app.add_subcommand(sc_cmd.cmd, sc_cmd.help);
        sub->add_option("--config", config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
        sub->add_option("--out-dir", out_dir, "Artifact directory (overrides the config)");
        subs[sc_cmd.cmd] = sub;
    }
    subs["detect-spikes"]->add_option("--traffic", traffic, "Traffic CSV (overrides the config)")->check(CLI::ExistingFile);

    auto* report = app.add_subcommand("report", "Print a report from a finished run");
    std::string report_kind, format = "csv", labels;
    report->add_option("kind", report_kind, "coverage | lead-time | spike-frequency")
        ->required()
        ->check(CLI::IsMember({"coverage", "lead-time", "spike-frequency"}));
    report->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    report->add_option("--config", config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
    report->add_option("--out-dir", out_dir, "Artifact directory (overrides the config)");
    report->add_option("--labels", labels, "Ground-truth spike labels (JSONL)")->check(CLI::ExistingFile);

    auto* run = app.add_subcommand("run", "Run every stage end to end");
    run->add_option("--config", config, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--out-dir", out_dir, "Artifact directory (overrides the config)");

    auto* synth = app.add_subcommand("synth", "Write a synthetic dataset, stub fixtures and pipeline.json");
    std::string scenario;
    synth->add_option("--scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
    synth->add_option("--out-dir", out_dir, "Dataset directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            auto sum = sc::write_synthetic_dataset(sc::load_scenario(scenario), out_dir);
            std::cout << sc::Json{{"samples", sum.samples},
                                  {"labels", sum.labels},
                                  {"posts", sum.posts},
                                  {"fixtures", sum.fixtures},
                                  {"config", sum.config.string()}}
                             .dump(2)
                      << "\n";
            return 0;
        }
        if (*run) {
            auto cfg = config_from(config, out_dir);
            auto rep = sc::run_pipeline(cfg);
            std::cout << rep.to_json().dump(2) << "\n";
            if (const auto* f = rep.failed_stage()) {
                std::cerr << "spikecast: stage " << f->name << " failed: " << f->error << "\n";
                return kExitFailed;
            }
            return 0;
        }
        if (*report) {
            auto cfg = config_from(config, out_dir);
            if (!labels.empty()) cfg.labels = labels;
            std::cout << read_report(cfg, report_kind, sc::parse_report_format(format));
            return 0;
        }
        for (const auto& sc_cmd : stage_cmds) {
            if (!*subs[sc_cmd.cmd]) continue;
            const std::string name = sc_cmd.cmd;
            if (config.empty() && name != "detect-spikes")
                throw sc::ConfigError(name + " needs --config");
            auto cfg = config_from(config, out_dir);
            if (!traffic.empty()) cfg.traffic = traffic;
            if (cfg.traffic.empty() && name == "detect-spikes") throw sc::ConfigError("detect-spikes needs --traffic or --config");
            sc::StageRunner runner(cfg);
            return print_stage(runner.run(sc_cmd.stage));
        }
    } catch (const sc::ConfigError& e) {
        std::cerr << "spikecast: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "spikecast: " << e.what() << "\n";
        return kExitFailed;
    }
    return 0;
}
