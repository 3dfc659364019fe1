#pragma once

#include <string>

#include "spikecast/core/types.hpp"

namespace spikecast {

// Events whose time is unknown are placed at local noon.
inline constexpr int kUnknownTimeMinutes = 12 * 60;

// UTC instant of a local date/time. A zone carried by the time string wins
// over the configured default offset.
inline UtcTime event_utc_of(const std::string& date, const std::string& time, int default_utc_offset_minutes) {
    auto d = parse_iso_date(date);
    if (!d) throw ValidationError("date", "not a calendar date: '" + date + "'");
    int minutes = kUnknownTimeMinutes;
    int offset = default_utc_offset_minutes;
    if (time != kUnknownTime) {
        auto tod = parse_time_of_day(time);
        if (!tod) throw ValidationError("time", "not a time of day: '" + time + "'");
        minutes = tod->minutes;
        if (tod->utc_offset_minutes) offset = *tod->utc_offset_minutes;
    }
    return utc_from_civil(*d, static_cast<std::int64_t>(minutes - offset) * 60);
}

// A fresh event from one draft: date, time and description are fixed here;
// every inferred field stays unset until inference fills it.
inline EventAbstraction build_event(const EventDraft& draft, const ContentRecord& record,
                                    int default_utc_offset_minutes = 0) {
    validate(draft);
    if (draft.source_record != record.record_id)
        throw PreconditionError("draft cites record " + draft.source_record + ", got " + record.record_id);
    EventAbstraction e;
    e.date = draft.date;
    e.time = draft.time;
    e.description = draft.headline;
    e.event_utc = event_utc_of(draft.date, draft.time, default_utc_offset_minutes);
    e.source_records = {record.record_id};
    e.first_mentioned_at = record.created_at;
    return e;
}

}  // namespace spikecast
