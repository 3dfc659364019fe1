#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "spikecast/core/serialize.hpp"

namespace spikecast {

struct NetworkSpec {
    std::string id;
    double base_bps = 1e10;
    std::string country;
    std::string continent;
};

// One real-world event planted in both traffic and discussion.
struct PlantedEvent {
    std::string id;
    std::string headline;
    std::string alt_headline;  // wording of duplicate announcements
    UtcTime time;
    double magnitude_z = 5.0;
    double duration_min = 60.0;
    std::string category;
    double lead_days = 7.0;  // first discussion this long before the event
    std::vector<std::string> networks;
    bool spontaneous = false;
    int duplicate_posts = 0;  // extra announcements of the same event
    std::string community = "events";
    StringList entities;
    StringList platforms;
    std::int64_t audience_size = 1'000'000;
    std::int64_t data_per_user_mb = 500;
    int likelihood = 8;
    RelevanceMap continent_relevance;
    RelevanceMap nation_relevance;
};

struct Scenario {
    std::uint64_t seed = 7;
    UtcTime start;  // a Monday 00:00 UTC
    int duration_weeks = 8;
    std::int64_t step_seconds = 300;
    double noise_std_fraction = 0.02;
    // Std floor of the detector, used to convert planted z into amplitude.
    double std_floor_fraction = 0.05;
    std::vector<NetworkSpec> networks;
    std::vector<PlantedEvent> planted_events;
    int background_posts = 5;
    std::vector<std::string> search_terms;
};

inline void to_json(Json& j, const NetworkSpec& n) {
    j = Json{{"id", n.id}, {"base_bps", n.base_bps}, {"country", n.country}, {"continent", n.continent}};
}
inline void from_json(const Json& j, NetworkSpec& n) {
    j.at("id").get_to(n.id);
    n.base_bps = j.value("base_bps", 1e10);
    n.country = j.value("country", "");
    n.continent = j.value("continent", "");
}

inline void to_json(Json& j, const PlantedEvent& p) {
    j = Json{{"id", p.id},
             {"headline", p.headline},
             {"alt_headline", p.alt_headline},
             {"time", format_utc(p.time)},
             {"magnitude_z", p.magnitude_z},
             {"duration_min", p.duration_min},
             {"category", p.category},
             {"lead_days", p.lead_days},
             {"networks", p.networks},
             {"spontaneous", p.spontaneous},
             {"duplicate_posts", p.duplicate_posts},
             {"community", p.community},
             {"entities", p.entities},
             {"platforms", p.platforms},
             {"audience_size", p.audience_size},
             {"data_per_user_mb", p.data_per_user_mb},
             {"likelihood", p.likelihood},
             {"continent_relevance", p.continent_relevance},
             {"nation_relevance", p.nation_relevance}};
}
inline void from_json(const Json& j, PlantedEvent& p) {
    j.at("id").get_to(p.id);
    j.at("headline").get_to(p.headline);
    p.alt_headline = j.value("alt_headline", "");
    p.time = parse_utc_or_throw(j.at("time").get<std::string>(), "time");
    p.magnitude_z = j.value("magnitude_z", 5.0);
    p.duration_min = j.value("duration_min", 60.0);
    j.at("category").get_to(p.category);
    p.lead_days = j.value("lead_days", 7.0);
    j.at("networks").get_to(p.networks);
    p.spontaneous = j.value("spontaneous", false);
    p.duplicate_posts = j.value("duplicate_posts", 0);
    p.community = j.value("community", "events");
    p.entities = j.value("entities", StringList{});
    p.platforms = j.value("platforms", StringList{});
    p.audience_size = j.value("audience_size", std::int64_t{1'000'000});
    p.data_per_user_mb = j.value("data_per_user_mb", std::int64_t{500});
    p.likelihood = j.value("likelihood", 8);
    p.continent_relevance = j.value("continent_relevance", RelevanceMap{});
    p.nation_relevance = j.value("nation_relevance", RelevanceMap{});
}

inline void to_json(Json& j, const Scenario& s) {
    j = Json{{"seed", s.seed},
             {"start", format_utc(s.start)},
             {"duration_weeks", s.duration_weeks},
             {"step_seconds", s.step_seconds},
             {"noise_std_fraction", s.noise_std_fraction},
             {"std_floor_fraction", s.std_floor_fraction},
             {"networks", s.networks},
             {"planted_events", s.planted_events},
             {"background_posts", s.background_posts},
             {"search_terms", s.search_terms}};
}
inline void from_json(const Json& j, Scenario& s) {
    s.seed = j.value("seed", std::uint64_t{7});
    s.start = parse_utc_or_throw(j.at("start").get<std::string>(), "start");
    s.duration_weeks = j.value("duration_weeks", 8);
    s.step_seconds = j.value("step_seconds", std::int64_t{300});
    s.noise_std_fraction = j.value("noise_std_fraction", 0.02);
    s.std_floor_fraction = j.value("std_floor_fraction", 0.05);
    j.at("networks").get_to(s.networks);
    s.planted_events = j.value("planted_events", std::vector<PlantedEvent>{});
    s.background_posts = j.value("background_posts", 5);
    s.search_terms = j.value("search_terms", std::vector<std::string>{});
}

inline void validate(const Scenario& s) {
    if (s.duration_weeks < 2) throw ConfigError("scenario needs at least two weeks (the first is warm-up)");
    if (s.step_seconds <= 0 || kSecondsPerWeek % s.step_seconds != 0)
        throw ConfigError("step_seconds must be positive and divide one week");
    if (weekday_of(s.start) != 0 || seconds_of_day(s.start) != 0)
        throw ConfigError("scenario start must be a Monday 00:00 UTC");
    if (s.noise_std_fraction < 0) throw ConfigError("noise_std_fraction must be >= 0");
    if (s.networks.empty()) throw ConfigError("scenario needs at least one network");
    std::set<std::string> nets, ids;
    for (const auto& n : s.networks) {
        if (n.id.empty() || !nets.insert(n.id).second) throw ConfigError("network ids must be unique and non-empty");
        if (!(n.base_bps > 0)) throw ConfigError("network " + n.id + ": base_bps must be > 0");
    }
    const UtcTime end = s.start.plus_seconds(s.duration_weeks * kSecondsPerWeek);
    for (const auto& p : s.planted_events) {
        if (p.id.empty() || !ids.insert(p.id).second) throw ConfigError("planted event ids must be unique");
        if (p.headline.empty()) throw ConfigError(p.id + ": empty headline");
        if (p.time < s.start || !(p.time < end)) throw ConfigError(p.id + ": time outside the scenario");
        if (p.magnitude_z < 0 || p.duration_min <= 0) throw ConfigError(p.id + ": bad magnitude/duration");
        if (p.lead_days < 0) throw ConfigError(p.id + ": lead_days must be >= 0");
        if (p.spontaneous && p.lead_days != 0) throw ConfigError(p.id + ": spontaneous events have zero lead");
        if (p.duplicate_posts > 0 && p.alt_headline.empty())
            throw ConfigError(p.id + ": duplicate posts need an alt_headline");
        for (const auto& n : p.networks)
            if (!nets.count(n)) throw ConfigError(p.id + ": unknown network " + n);
    }
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario " + path.string());
    Scenario s = Json::parse(in).get<Scenario>();
    validate(s);
    return s;
}

}  // namespace spikecast
