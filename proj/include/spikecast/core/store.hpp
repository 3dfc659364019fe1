#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "spikecast/core/serialize.hpp"

namespace spikecast {

namespace fs = std::filesystem;

// Reads every non-blank line of a JSON-lines file.
inline std::vector<Json> read_json_lines(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<Json> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(Json::parse(line));
        } catch (const Json::parse_error& e) {
            throw ValidationError(path.string() + ":" + std::to_string(lineno), e.what());
        }
    }
    return out;
}

template <typename T>
std::vector<T> read_jsonl(const fs::path& path) {
    std::vector<T> out;
    for (const auto& j : read_json_lines(path)) out.push_back(j.template get<T>());
    return out;
}

// Appends `payload` in a single write; on failure the file is truncated back
// to its previous size so no partial line survives.
inline void append_atomically(const fs::path& path, const std::string& payload) {
    std::error_code ec;
    const auto before = fs::exists(path, ec) ? fs::file_size(path, ec) : std::uintmax_t{0};
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for append");
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    out.flush();
    if (!out) {
        out.close();
        fs::resize_file(path, before, ec);
        throw IoError("write failed on " + path.string());
    }
}

template <typename T>
void write_jsonl(const fs::path& path, const std::vector<T>& items) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    for (const auto& item : items) out << Json(item).dump() << '\n';
    if (!out) throw IoError("write failed on " + path.string());
}

template <typename T>
struct StoreTraits;

template <>
struct StoreTraits<ContentRecord> {
    static constexpr const char* prefix = "rec-";
    static std::string& id(ContentRecord& r) { return r.record_id; }
};

template <>
struct StoreTraits<SpikeRecord> {
    static constexpr const char* prefix = "spk-";
    static std::string& id(SpikeRecord& r) { return r.spike_id; }
};

template <>
struct StoreTraits<EventAbstraction> {
    static constexpr const char* prefix = "evt-";
    static std::string& id(EventAbstraction& e) { return e.event_id; }
};

inline std::string sequential_id(const char* prefix, std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%06zu", prefix, n);
    return buf;
}

// Append-only JSON-lines store for one record type. Single writer; the
// mutex only serializes appends issued from several pipeline threads.
template <typename T>
class JsonlStore {
public:
    explicit JsonlStore(fs::path path) : path_(std::move(path)) {
        if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
        if (fs::exists(path_))
            for (auto& rec : read_jsonl<T>(path_)) ids_.insert(StoreTraits<T>::id(rec));
    }

    // Validates, assigns an id when absent, and appends. Returns the id.
    std::string append(T record) {
        std::lock_guard lock(mu_);
        std::string& id = StoreTraits<T>::id(record);
        if (id.empty()) {
            std::size_t n = ids_.size() + 1;
            do id = sequential_id(StoreTraits<T>::prefix, n++);
            while (ids_.count(id));
        }
        validate(record);
        if (ids_.count(id)) throw ValidationError("id", "duplicate id '" + id + "'");
        append_atomically(path_, Json(record).dump() + "\n");
        ids_.insert(id);
        return id;
    }

    std::vector<T> load() const { return fs::exists(path_) ? read_jsonl<T>(path_) : std::vector<T>{}; }
    std::size_t size() const { return ids_.size(); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
    std::unordered_set<std::string> ids_;
    mutable std::mutex mu_;
};

// Event store: each line is either an event version or a tombstone. The
// latest version of an id wins; tombstoned ids are hidden from current().
class EventStore {
public:
    explicit EventStore(fs::path path) : path_(std::move(path)) {
        if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
        if (fs::exists(path_))
            for (const auto& j : read_json_lines(path_)) apply(j);
    }

    std::string append(EventAbstraction e) {
        std::lock_guard lock(mu_);
        if (e.event_id.empty()) {
            std::size_t n = order_.size() + 1;
            do e.event_id = sequential_id("evt-", n++);
            while (latest_.count(e.event_id));
        } else if (latest_.count(e.event_id)) {
            throw ValidationError("event_id", "duplicate id '" + e.event_id + "'");
        }
        validate(e);
        write({event_line(e)});
        return e.event_id;
    }

    // Appends a newer version of an existing, live event.
    void update(const EventAbstraction& e) {
        std::lock_guard lock(mu_);
        require_live(e.event_id);
        validate(e);
        write({event_line(e)});
    }

    // Tombstones every absorbed id and appends the survivor's new version in
    // one write: either all lines land or none do.
    void commit_merge(const EventAbstraction& survivor, const std::vector<std::string>& absorbed) {
        std::lock_guard lock(mu_);
        require_live(survivor.event_id);
        for (const auto& id : absorbed) require_live(id);
        validate(survivor);
        std::vector<Json> lines;
        for (const auto& id : absorbed)
            lines.push_back(Json{{"schema_version", kSchemaVersion},
                                 {"kind", "tombstone"},
                                 {"event_id", id},
                                 {"absorbed_into", survivor.event_id}});
        lines.push_back(event_line(survivor));
        write(lines);
    }

    std::vector<EventAbstraction> current() const {
        std::lock_guard lock(mu_);
        std::vector<EventAbstraction> out;
        for (const auto& id : order_)
            if (!tombstoned_.count(id)) out.push_back(latest_.at(id));
        return out;
    }

    std::optional<EventAbstraction> find(const std::string& id) const {
        std::lock_guard lock(mu_);
        auto it = latest_.find(id);
        if (it == latest_.end() || tombstoned_.count(id)) return std::nullopt;
        return it->second;
    }

    bool is_tombstoned(const std::string& id) const {
        std::lock_guard lock(mu_);
        return tombstoned_.count(id) > 0;
    }

    const fs::path& path() const { return path_; }

private:
    static Json event_line(const EventAbstraction& e) {
        Json j = e;
        j["kind"] = "event";
        return j;
    }

    void require_live(const std::string& id) const {
        if (!latest_.count(id)) throw ValidationError("event_id", "unknown event '" + id + "'");
        if (tombstoned_.count(id)) throw ValidationError("event_id", "event '" + id + "' was merged away");
    }

    void apply(const Json& j) {
        if (j.value("kind", "event") == "tombstone") {
            tombstoned_.insert(j.at("event_id").get<std::string>());
            return;
        }
        auto e = j.get<EventAbstraction>();
        if (!latest_.count(e.event_id)) order_.push_back(e.event_id);
        latest_[e.event_id] = std::move(e);
    }

    void write(const std::vector<Json>& lines) {
        std::string payload;
        for (const auto& l : lines) payload += l.dump() + "\n";
        append_atomically(path_, payload);
        for (const auto& l : lines) apply(l);
    }

    fs::path path_;
    std::vector<std::string> order_;
    std::map<std::string, EventAbstraction> latest_;
    std::set<std::string> tombstoned_;
    mutable std::mutex mu_;
};

}  // namespace spikecast
