#include "session.hpp"

#include <algorithm>
#include <charconv>
#include <map>

namespace skiprec {

LogSchema parse_schema(const std::string& name) {
    if (name == "raw-log") return LogSchema::raw_log;
    if (name == "pre-sessionized") return LogSchema::pre_sessionized;
    fail_config("unknown schema tag: '" + name + "' (expected raw-log or pre-sessionized)");
}

const char* schema_name(LogSchema schema) {
    return schema == LogSchema::raw_log ? "raw-log" : "pre-sessionized";
}

Vocabulary::Vocabulary() : reverse{"<pad>", "<mask>", "<end>"} {}

int32_t Vocabulary::add(const std::string& track_key) {
    auto it = forward.find(track_key);
    if (it != forward.end()) return it->second;
    int32_t idx = size();
    forward.emplace(track_key, idx);
    reverse.push_back(track_key);
    return idx;
}

int32_t Vocabulary::lookup(const std::string& track_key) const {
    auto it = forward.find(track_key);
    return it == forward.end() ? -1 : it->second;
}

uint64_t Vocabulary::content_hash() const {
    uint64_t h = kFnvOffset;
    for (int32_t i = kFirstItem; i < size(); ++i) {
        h = fnv1a64(reverse[static_cast<size_t>(i)], h);
        h = fnv1a64("\n", h);
    }
    return h;
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
    char delim = line.find('\t') != std::string::npos ? '\t' : ',';
    std::vector<std::string> fields;
    size_t start = 0;
    for (;;) {
        size_t pos = line.find(delim, start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

int64_t parse_int_field(const std::string& field, size_t line_no, const char* what) {
    int64_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        fail_config("line " + std::to_string(line_no) + ": bad " + what + " '" + field + "'");
    return value;
}

}  // namespace

std::vector<Event> parse_events(std::istream& input, LogSchema schema) {
    std::vector<Event> events;
    std::string line;
    size_t line_no = 0;
    while (std::getline(input, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_row(line);
        Event ev;
        if (schema == LogSchema::raw_log) {
            if (fields.size() != 3)
                fail_config("line " + std::to_string(line_no) + ": expected 3 fields, got " +
                            std::to_string(fields.size()));
            ev.user_key = fields[0];
            ev.timestamp = parse_int_field(fields[1], line_no, "timestamp");
            ev.track_key = fields[2];
            if (ev.timestamp < 0)
                fail_config("line " + std::to_string(line_no) + ": negative timestamp");
        } else {
            if (fields.size() != 4)
                fail_config("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                            std::to_string(fields.size()));
            ev.user_key = fields[0];
            ev.timestamp = parse_int_field(fields[1], line_no, "position");
            ev.track_key = fields[2];
            int64_t flag = parse_int_field(fields[3], line_no, "skip flag");
            if (flag != 0 && flag != 1)
                fail_config("line " + std::to_string(line_no) + ": skip flag must be 0 or 1");
            ev.skip_annotation = flag == 1;
        }
        if (ev.track_key.empty())
            fail_config("line " + std::to_string(line_no) + ": empty track key");
        events.push_back(std::move(ev));
    }
    return events;
}

std::vector<RawSession> sessionize(const std::vector<Event>& events, int64_t gap_seconds) {
    // std::map keeps users in user_key order, which fixes the output order.
    std::map<std::string, std::vector<Event>> by_user;
    for (const auto& ev : events) by_user[ev.user_key].push_back(ev);

    std::vector<RawSession> sessions;
    for (auto& [user, stream] : by_user) {
        std::stable_sort(stream.begin(), stream.end(),
                         [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
        RawSession current;
        for (auto& ev : stream) {
            if (!current.events.empty() &&
                ev.timestamp - current.events.back().timestamp > gap_seconds) {
                sessions.push_back(std::move(current));
                current = RawSession{};
            }
            current.events.push_back(std::move(ev));
        }
        if (!current.events.empty()) sessions.push_back(std::move(current));
    }
    return sessions;
}

std::vector<RawSession> group_presessionized(const std::vector<Event>& events) {
    std::vector<std::string> order;
    std::unordered_map<std::string, size_t> slot;
    std::vector<RawSession> sessions;
    for (const auto& ev : events) {
        auto it = slot.find(ev.user_key);
        if (it == slot.end()) {
            slot.emplace(ev.user_key, sessions.size());
            sessions.emplace_back();
            it = slot.find(ev.user_key);
        }
        sessions[it->second].events.push_back(ev);
    }
    for (auto& s : sessions) {
        std::stable_sort(s.events.begin(), s.events.end(),
                         [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
    }
    return sessions;
}

LabeledSession label_skips(const RawSession& session, LogSchema mode, int64_t threshold_seconds) {
    LabeledSession out;
    size_t n = session.events.size();
    out.tracks.reserve(n);
    out.skipped.reserve(n);
    for (size_t t = 0; t < n; ++t) {
        const Event& ev = session.events[t];
        out.tracks.push_back(ev.track_key);
        if (mode == LogSchema::pre_sessionized) {
            if (!ev.skip_annotation.has_value())
                fail_config("pre-sessionized event without skip annotation (track '" +
                            ev.track_key + "')");
            out.skipped.push_back(*ev.skip_annotation ? 1 : 0);
        } else {
            // Skip is only observable through the next event's start time, so
            // the final event defaults to positive.
            bool skip = t + 1 < n &&
                        session.events[t + 1].timestamp - ev.timestamp < threshold_seconds;
            out.skipped.push_back(skip ? 1 : 0);
        }
    }
    return out;
}

std::vector<LabeledSession> filter_and_split(const std::vector<LabeledSession>& sessions,
                                             size_t min_events, size_t max_len) {
    if (min_events == 0 || max_len == 0 || min_events > max_len)
        fail_config("filter_and_split: need 1 <= min_events <= max_len");
    std::vector<LabeledSession> out;
    for (const auto& s : sessions) {
        size_t n = s.tracks.size();
        for (size_t start = 0; start < n; start += max_len) {
            size_t len = std::min(max_len, n - start);
            if (len < min_events) break;  // trailing chunk too short
            LabeledSession chunk;
            chunk.tracks.assign(s.tracks.begin() + static_cast<ptrdiff_t>(start),
                                s.tracks.begin() + static_cast<ptrdiff_t>(start + len));
            chunk.skipped.assign(s.skipped.begin() + static_cast<ptrdiff_t>(start),
                                 s.skipped.begin() + static_cast<ptrdiff_t>(start + len));
            out.push_back(std::move(chunk));
        }
    }
    return out;
}

Vocabulary build_vocabulary(const std::vector<LabeledSession>& sessions) {
    Vocabulary vocab;
    for (const auto& s : sessions)
        for (const auto& track : s.tracks) vocab.add(track);
    return vocab;
}

Session index_session(const LabeledSession& labeled, const Vocabulary& vocab) {
    Session s;
    s.items.reserve(labeled.tracks.size());
    for (const auto& track : labeled.tracks) {
        int32_t idx = vocab.lookup(track);
        if (idx < 0) fail_config("track not in vocabulary: '" + track + "'");
        s.items.push_back(idx);
    }
    s.skipped = labeled.skipped;
    return s;
}

TargetMap build_targets(const Session& session) {
    size_t n = session.size();
    TargetMap map;
    map.next_positive.assign(n, -1);
    map.negatives_between.resize(n);

    int32_t next_pos = -1;
    for (size_t i = n; i-- > 0;) {
        map.next_positive[i] = next_pos;
        if (!session.skipped[i]) next_pos = static_cast<int32_t>(i);
    }
    for (size_t t = 0; t < n; ++t) {
        int32_t m = map.next_positive[t];
        if (m < 0) continue;
        for (int32_t j = static_cast<int32_t>(t) + 1; j < m; ++j)
            map.negatives_between[t].push_back(j);
    }
    for (size_t t = 0; t < n; ++t)
        if (session.skipped[t]) map.negatives_all.push_back(static_cast<int32_t>(t));
    return map;
}

HoldoutSplit holdout_split(const Session& session) {
    size_t n = session.size();
    if (n < 3)
        fail_config("holdout_split: session length " + std::to_string(n) + " < 3");
    HoldoutSplit split;
    split.train_prefix.items.assign(session.items.begin(), session.items.end() - 2);
    split.train_prefix.skipped.assign(session.skipped.begin(), session.skipped.end() - 2);
    split.validation_target = {session.items[n - 2], session.skipped[n - 2]};
    split.test_target = {session.items[n - 1], session.skipped[n - 1]};
    return split;
}

}  // namespace skiprec
