#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "util.hpp"

namespace skiprec {

// One raw listening-log row. user_key is discarded after sessionization.
struct Event {
    std::string user_key;
    int64_t timestamp = 0;  // seconds since epoch (raw-log) or position (pre-sessionized)
    std::string track_key;
    std::optional<bool> skip_annotation;
};

enum class LogSchema { raw_log, pre_sessionized };

LogSchema parse_schema(const std::string& name);
const char* schema_name(LogSchema schema);

// A user- (or session-key-) contiguous run of events, pre skip labeling.
struct RawSession {
    std::vector<Event> events;
};

// Session after skip labeling but before vocabulary indexing.
struct LabeledSession {
    std::vector<std::string> tracks;
    std::vector<uint8_t> skipped;
};

// Ordered track sequence over vocabulary indices with per-position skip flags.
struct Session {
    std::vector<int32_t> items;
    std::vector<uint8_t> skipped;

    size_t size() const { return items.size(); }
};

struct Vocabulary {
    static constexpr int32_t kPad = 0;
    static constexpr int32_t kMask = 1;
    static constexpr int32_t kEnd = 2;
    static constexpr int32_t kFirstItem = 3;

    std::unordered_map<std::string, int32_t> forward;
    std::vector<std::string> reverse;  // index -> key; slots 0..2 hold reserved token names

    Vocabulary();

    int32_t add(const std::string& track_key);           // idempotent
    int32_t lookup(const std::string& track_key) const;  // -1 if absent
    int32_t size() const { return static_cast<int32_t>(reverse.size()); }
    int32_t real_item_count() const { return size() - kFirstItem; }
    uint64_t content_hash() const;
};

// Per-position next-positive index and negative sets for one session.
struct TargetMap {
    std::vector<int32_t> next_positive;                  // -1 when no positive follows
    std::vector<std::vector<int32_t>> negatives_between; // positions strictly between t and m
    std::vector<int32_t> negatives_all;                  // every skipped position, ascending
};

struct HoldoutSplit {
    Session train_prefix;
    std::pair<int32_t, uint8_t> validation_target;  // (item, skipped)
    std::pair<int32_t, uint8_t> test_target;
};

// --- Pipeline operations -----------------------------------------------

// Parses tab- or comma-separated rows of the declared schema. Malformed rows
// raise a config error naming the 1-based line number.
std::vector<Event> parse_events(std::istream& input, LogSchema schema);

// Groups events by user, orders each group chronologically (stable for equal
// timestamps) and splits where the inter-event gap strictly exceeds
// gap_seconds. Output is ordered by (user_key, first timestamp); user keys do
// not survive past this point.
std::vector<RawSession> sessionize(const std::vector<Event>& events, int64_t gap_seconds = 1200);

// Groups pre-sessionized events by session key (first-appearance order),
// ordering each group by its position column.
std::vector<RawSession> group_presessionized(const std::vector<Event>& events);

// Raw-log mode: event t is a skip iff the next event starts strictly less
// than threshold_seconds later; the final event is positive. Annotated mode:
// copies skip_annotation verbatim.
LabeledSession label_skips(const RawSession& session, LogSchema mode, int64_t threshold_seconds = 30);

// Drops sessions shorter than min_events and chunks longer-than-max_len
// sessions into consecutive non-overlapping segments; trailing chunks
// shorter than min_events are dropped.
std::vector<LabeledSession> filter_and_split(const std::vector<LabeledSession>& sessions,
                                             size_t min_events = 5, size_t max_len = 20);

// Deterministic first-appearance index assignment starting at kFirstItem.
Vocabulary build_vocabulary(const std::vector<LabeledSession>& sessions);

Session index_session(const LabeledSession& labeled, const Vocabulary& vocab);

TargetMap build_targets(const Session& session);

// Splits off the final (test) and second-to-last (validation) items.
// Sessions shorter than 3 cannot be split.
HoldoutSplit holdout_split(const Session& session);

}  // namespace skiprec
