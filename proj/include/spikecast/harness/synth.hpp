#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "spikecast/core/random.hpp"
#include "spikecast/harness/scenario.hpp"
#include "spikecast/inference/backend.hpp"
#include "spikecast/inference/fields.hpp"
#include "spikecast/inference/prompts.hpp"
#include "spikecast/inference/retrieval.hpp"
#include "spikecast/ingestion/raw_post.hpp"

namespace spikecast {

// Ground truth for one planted traffic bump on one network.
struct SynthLabel {
    std::string network_id;
    UtcTime start;
    UtcTime end;
    std::string plant_id;
    bool spontaneous = false;
    double magnitude_z = 0;
};

inline void to_json(Json& j, const SynthLabel& l) {
    j = Json{{"network_id", l.network_id}, {"start", l.start},          {"end", l.end},
             {"plant_id", l.plant_id},     {"spontaneous", l.spontaneous}, {"magnitude_z", l.magnitude_z}};
}
inline void from_json(const Json& j, SynthLabel& l) {
    j.at("network_id").get_to(l.network_id);
    j.at("start").get_to(l.start);
    j.at("end").get_to(l.end);
    l.plant_id = j.value("plant_id", "");
    l.spontaneous = j.value("spontaneous", false);
    l.magnitude_z = j.value("magnitude_z", 0.0);
}

// Weekly-periodic load in [0.6, 1.05] of the base level: trough at 08:30,
// peak at 20:30 UTC, weekends 5% higher. Identical every week, so a clean
// history predicts it exactly.
inline double diurnal_shape(UtcTime t) {
    const double h = static_cast<double>(seconds_of_day(t)) / 3600.0;
    const double day = 0.6 + 0.4 * 0.5 * (1.0 - std::cos(2.0 * M_PI * (h - 8.5) / 24.0));
    return weekday_of(t) >= 5 ? day * 1.05 : day;
}

struct SyntheticTraffic {
    std::vector<TrafficSeries> series;
    std::vector<SynthLabel> labels;
};

// Periodic load + Gaussian noise + a rectangular plateau per planted event.
// A plateau's height is magnitude_z times the detector's effective std, so a
// planted z of 5 scores about 5.
inline SyntheticTraffic synth_traffic(const Scenario& s) {
    validate(s);
    SyntheticTraffic out;
    const auto n = static_cast<std::size_t>(s.duration_weeks * kSecondsPerWeek / s.step_seconds);
    const double sigma_unit = std::max(s.noise_std_fraction, s.std_floor_fraction);
    for (const auto& net : s.networks) {
        Rng rng(s.seed ^ fnv1a64(net.id));
        TrafficSeries ts{net.id, s.start, s.step_seconds, std::vector<double>(n)};
        for (std::size_t i = 0; i < n; ++i) {
            const double level = net.base_bps * diurnal_shape(ts.time_at(i));
            ts.values[i] = level + rng.normal(0.0, s.noise_std_fraction * level);
        }
        for (const auto& p : s.planted_events) {
            if (std::find(p.networks.begin(), p.networks.end(), net.id) == p.networks.end()) continue;
            const UtcTime end = p.time.plus_minutes(p.duration_min);
            for (std::size_t i = 0; i < n; ++i) {
                const UtcTime t = ts.time_at(i);
                if (t < p.time || !(t < end)) continue;
                ts.values[i] += p.magnitude_z * sigma_unit * net.base_bps * diurnal_shape(t);
            }
            out.labels.push_back({net.id, p.time, end, p.id, p.spontaneous, p.magnitude_z});
        }
        for (double& v : ts.values) v = std::max(0.0, v);
        out.series.push_back(std::move(ts));
    }
    std::sort(out.labels.begin(), out.labels.end(), [](const SynthLabel& a, const SynthLabel& b) {
        return std::tie(a.network_id, a.start, a.plant_id) < std::tie(b.network_id, b.start, b.plant_id);
    });
    return out;
}

struct SyntheticCorpus {
    std::vector<RawPost> posts;
    std::map<std::string, std::string> pages;  // url -> html
    std::vector<RetrievedDoc> wiki;
};

namespace detail {

inline std::string hhmm(UtcTime t) {
    const auto sod = seconds_of_day(t);
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02d:%02d", static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60));
    return buf;
}

inline std::string slug(std::string_view s) { return join(tokenize(s), "-"); }

inline UtcTime lead_back(UtcTime t, double days) {
    return t.plus_seconds(-static_cast<std::int64_t>(std::llround(days * kSecondsPerDay)));
}

inline const char* const kBackgroundTitles[] = {
    "What is everyone's home streaming setup these days?",
    "Weekly discussion thread: recommendations",
    "Best headphones under 100?",
    "Anyone else notice slower downloads lately?",
    "Favourite episodes of all time",
    "Looking for a new podcast",
    "Rate my desk setup",
    "Unpopular opinions thread",
};

}  // namespace detail

// The discussion side of a scenario: one announcement per planted event,
// posted lead_days ahead (spontaneous ones at the event itself), extra
// reworded announcements for duplicates, chatter that names no event, and an
// encyclopedia entry per entity.
inline SyntheticCorpus synth_corpus(const Scenario& s) {
    validate(s);
    SyntheticCorpus c;
    Rng rng(s.seed ^ 0xc0ffeeULL);
    std::set<std::string> entities;
    std::size_t idx = 0;
    for (const auto& p : s.planted_events) {
        const std::string date = format_iso_date(civil_date_of(p.time));
        const UtcTime posted = detail::lead_back(p.time, p.lead_days);
        auto body_for = [&](const std::string& headline) {
            std::string b = p.spontaneous ? "Happening right now: " + headline + "."
                                          : headline + ". Scheduled for " + date + " at " + detail::hhmm(p.time) + " UTC.";
            if (!p.entities.empty()) b += " Featuring " + join(p.entities, ", ") + ".";
            if (!p.platforms.empty()) b += " Watch on " + join(p.platforms, ", ") + ".";
            return b;
        };
        RawPost post;
        post.post_id = "p-" + p.id;
        post.community = p.community;
        post.title = p.headline;
        post.body = body_for(p.headline);
        post.score = 40 + static_cast<std::int64_t>(rng.uniform_int(0, 400));
        post.comments_raw = {{"Can't wait for this!", 12}, {"Setting a reminder.", 5}};
        post.created_at = posted;
        post.fetched_at = posted.plus_seconds(3600);
        if (idx % 3 == 0) {
            const std::string url = "https://news.example/" + detail::slug(p.headline);
            post.outbound_urls.push_back(url);
            c.pages[url] = "<html><body><article><p>" + body_for(p.headline) +
                           " Organisers expect a very large online audience for the broadcast.</p></article></body></html>";
        }
        c.posts.push_back(post);

        for (int k = 1; k <= p.duplicate_posts; ++k) {
            RawPost dup;
            dup.post_id = "p-" + p.id + "-dup" + std::to_string(k);
            dup.community = p.community;
            dup.title = p.alt_headline;
            dup.body = body_for(p.alt_headline);
            dup.score = 10 + static_cast<std::int64_t>(rng.uniform_int(0, 100));
            dup.comments_raw = {{"Already posted, but still hyped.", 3}};
            // Later than the first announcement, never after the event.
            dup.created_at = detail::lead_back(p.time, p.lead_days * (1.0 - static_cast<double>(k) / (p.duplicate_posts + 1)));
            dup.fetched_at = dup.created_at.plus_seconds(3600);
            c.posts.push_back(std::move(dup));
        }
        entities.insert(p.entities.begin(), p.entities.end());
        ++idx;
    }
    const std::string community = s.planted_events.empty() ? "events" : s.planted_events.front().community;
    for (int i = 0; i < s.background_posts; ++i) {
        RawPost bg;
        bg.post_id = "bg-" + std::to_string(i + 1);
        bg.community = community;
        bg.title = detail::kBackgroundTitles[static_cast<std::size_t>(i) % std::size(detail::kBackgroundTitles)];
        bg.body = "General chat, nothing scheduled. Thread " + std::to_string(i + 1) + ".";
        bg.score = 5 + static_cast<std::int64_t>(rng.uniform_int(0, 50));
        bg.created_at = s.start.plus_seconds(rng.uniform_int(0, s.duration_weeks * kSecondsPerWeek - 1));
        bg.fetched_at = bg.created_at.plus_seconds(3600);
        c.posts.push_back(std::move(bg));
    }
    for (const auto& e : entities)
        c.wiki.push_back({e, "<p>" + e + " regularly draws large live audiences online.</p>",
                          "https://wiki.example/" + detail::slug(e)});
    // Posts arrive in creation order, as a crawler would list them.
    std::stable_sort(c.posts.begin(), c.posts.end(),
                     [](const RawPost& a, const RawPost& b) { return a.created_at < b.created_at; });
    return c;
}

// Answers extraction and field prompts from the scenario itself, with small
// run-to-run disagreement so the ensemble rules have something to do. Used
// to record stub fixtures; never part of a real run.
class PlantedTruthBackend : public LlmBackend {
public:
    PlantedTruthBackend(const Scenario& s, const PromptLibrary& prompts) : scenario_(s) {
        for (std::size_t i = 0; i < s.planted_events.size(); ++i) {
            const auto& p = s.planted_events[i];
            by_text_[p.headline] = i;
            if (!p.alt_headline.empty()) by_text_[p.alt_headline] = i;
        }
        extract_prefix_ = prefix_of(prompts.get(kExtractPromptId));
        reminder_prefix_ = prefix_of(prompts.get(kReminderPromptId));
        for (const auto& spec : kEventFields)
            if (is_llm_inferred(spec))
                field_prefixes_.emplace_back(prefix_of(prompts.get(std::string(spec.prompt_template_id))),
                                             std::string(spec.field_name));
    }

    std::string send(const std::string& prompt, const DecodingParams& params) override {
        if (prompt.starts_with(extract_prefix_) || prompt.starts_with(reminder_prefix_)) return extraction(prompt);
        for (const auto& [prefix, field] : field_prefixes_)
            if (prompt.starts_with(prefix)) return field_answer(field, prompt, params.run_index);
        throw BackendError("truth backend: unrecognised prompt", false);
    }

private:
    static constexpr const char* kExtractPromptId = "extract_events.v1";
    static constexpr const char* kReminderPromptId = "extract_events_reminder.v1";

    static std::string prefix_of(const std::string& tmpl) { return tmpl.substr(0, tmpl.find("{{")); }

    static std::string line_after(const std::string& text, const std::string& tag) {
        auto at = text.find("\n" + tag);
        if (at == std::string::npos) return {};
        at += 1 + tag.size();
        return text.substr(at, text.find('\n', at) - at);
    }

    const PlantedEvent* lookup(const std::string& text) const {
        auto it = by_text_.find(text);
        return it == by_text_.end() ? nullptr : &scenario_.planted_events[it->second];
    }

    std::string extraction(const std::string& prompt) const {
        const std::string title = line_after(prompt, "Title: ");
        Json events = Json::array();
        if (const auto* p = lookup(title))
            events.push_back(Json{{"headline", title},
                                  {"date", format_iso_date(civil_date_of(p->time))},
                                  {"time", detail::hhmm(p->time) + "+00:00"}});
        return Json{{"events", events}}.dump();
    }

    std::string field_answer(const std::string& field, const std::string& prompt, int run_index) const {
        const auto* p = lookup(line_after(prompt, "Event: "));
        if (!p) return R"({"value": null})";
        const int r = run_index % 3;
        const std::size_t plant = static_cast<std::size_t>(p - scenario_.planted_events.data());
        Json v;
        if (field == "category") {
            v = r == 2 && plant % 4 == 0 ? std::string("Entertainment") : p->category;
        } else if (field == "entities") {
            StringList l = p->entities;
            if (r == 1) l.push_back("Fan Zone");
            v = l;
        } else if (field == "platforms") {
            StringList l = p->platforms;
            if (r == 2) l.push_back("Radio");
            v = l;
        } else if (field == "data_per_user_mb" || field == "audience_size") {
            const double base = static_cast<double>(field == "audience_size" ? p->audience_size : p->data_per_user_mb);
            constexpr double jitter[] = {1.0, 0.9, 1.1};
            v = std::llround(base * jitter[r]);
        } else if (field == "continent_relevance" || field == "nation_relevance") {
            RelevanceMap m = field == "continent_relevance" ? p->continent_relevance : p->nation_relevance;
            if (r == 1 && !m.empty()) m.erase(std::prev(m.end()));
            v = m;
        } else if (field == "spike_duration_hours") {
            constexpr double jitter[] = {1.0, 0.9, 1.2};
            v = p->duration_min / 60.0 * jitter[r];
        } else if (field == "likelihood") {
            v = std::clamp(p->likelihood + (r == 1 ? -1 : r == 2 ? 1 : 0), 0, 10);
        } else {
            return R"({"value": null})";
        }
        return Json{{"value", v}}.dump();
    }

    const Scenario& scenario_;
    std::map<std::string, std::size_t> by_text_;
    std::string extract_prefix_, reminder_prefix_;
    std::vector<std::pair<std::string, std::string>> field_prefixes_;
};

}  // namespace spikecast
