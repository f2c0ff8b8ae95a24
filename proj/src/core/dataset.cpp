#include "dataset.hpp"

#include <charconv>
#include <cstring>
#include <sstream>

namespace skiprec {

namespace {

std::string serialize_sessions(const std::vector<Session>& sessions) {
    std::string out(kDatasetMagic);
    out += '\n';
    for (const auto& s : sessions) {
        for (size_t t = 0; t < s.size(); ++t) {
            if (t) out += ' ';
            out += std::to_string(s.items[t]);
            out += ':';
            out += s.skipped[t] ? '1' : '0';
        }
        out += '\n';
    }
    return out;
}

std::vector<Session> parse_sessions(const std::string& text, int32_t vocab_size) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kDatasetMagic)
        fail_integrity("sessions file: bad magic (expected " + std::string(kDatasetMagic) + ")");
    std::vector<Session> sessions;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        Session s;
        const char* p = line.data();
        const char* end = p + line.size();
        while (p < end) {
            int32_t item = 0;
            auto [q, ec] = std::from_chars(p, end, item);
            if (ec != std::errc{} || q >= end || *q != ':')
                fail_integrity("sessions file line " + std::to_string(line_no) + ": bad record");
            char flag = *(q + 1);
            if (flag != '0' && flag != '1')
                fail_integrity("sessions file line " + std::to_string(line_no) + ": bad flag");
            if (item < Vocabulary::kFirstItem || item >= vocab_size)
                fail_integrity("sessions file line " + std::to_string(line_no) +
                               ": item index out of range");
            s.items.push_back(item);
            s.skipped.push_back(flag == '1' ? 1 : 0);
            p = q + 2;
            if (p < end && *p == ' ') ++p;
        }
        if (!s.items.empty()) sessions.push_back(std::move(s));
    }
    return sessions;
}

void append_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t read_u32(const std::string& bytes, size_t off) {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<uint32_t>(static_cast<unsigned char>(bytes[off + i])) << (8 * i);
    return v;
}

void append_doubles(std::string& out, const std::vector<double>& v) {
    static_assert(sizeof(double) == 8);
    size_t old = out.size();
    out.resize(old + v.size() * 8);
    std::memcpy(out.data() + old, v.data(), v.size() * 8);
}

std::string serialize_truth(const GroundTruth& gt) {
    nlohmann::json header{{"catalog", gt.catalog}, {"dim", gt.dim}, {"sessions", gt.sessions}};
    std::string hdr = header.dump();
    std::string out(kGroundTruthMagic);
    out += '\n';
    append_u32(out, static_cast<uint32_t>(hdr.size()));
    out += hdr;
    append_doubles(out, gt.item_factors);
    append_doubles(out, gt.tastes);
    return out;
}

GroundTruth parse_truth(const std::string& bytes) {
    std::string magic = std::string(kGroundTruthMagic) + "\n";
    if (bytes.size() < magic.size() + 4 || bytes.compare(0, magic.size(), magic) != 0)
        fail_integrity("ground truth file: bad magic");
    size_t off = magic.size();
    uint32_t hdr_len = read_u32(bytes, off);
    off += 4;
    if (off + hdr_len > bytes.size()) fail_integrity("ground truth file: truncated header");
    auto header = nlohmann::json::parse(bytes.substr(off, hdr_len));
    off += hdr_len;

    GroundTruth gt;
    gt.catalog = header.at("catalog").get<int64_t>();
    gt.dim = header.at("dim").get<int64_t>();
    gt.sessions = header.at("sessions").get<int64_t>();
    size_t n_items = static_cast<size_t>(gt.catalog * gt.dim);
    size_t n_tastes = static_cast<size_t>(gt.sessions * gt.dim);
    if (off + (n_items + n_tastes) * 8 != bytes.size())
        fail_integrity("ground truth file: size mismatch");
    gt.item_factors.resize(n_items);
    std::memcpy(gt.item_factors.data(), bytes.data() + off, n_items * 8);
    off += n_items * 8;
    gt.tastes.resize(n_tastes);
    std::memcpy(gt.tastes.data(), bytes.data() + off, n_tastes * 8);
    return gt;
}

}  // namespace

size_t Dataset::event_count() const {
    size_t n = 0;
    for (const auto& s : sessions) n += s.size();
    return n;
}

size_t Dataset::skip_count() const {
    size_t n = 0;
    for (const auto& s : sessions)
        for (uint8_t f : s.skipped) n += f;
    return n;
}

double Dataset::skip_rate() const {
    size_t events = event_count();
    return events == 0 ? 0.0 : static_cast<double>(skip_count()) / static_cast<double>(events);
}

uint64_t Dataset::content_hash() const {
    uint64_t h = fnv1a64(serialize_sessions(sessions));
    return fnv1a64(hex64(vocab.content_hash()), h);
}

nlohmann::json Dataset::manifest(const std::string& prefix) const {
    std::vector<std::string> real_items(vocab.reverse.begin() + Vocabulary::kFirstItem,
                                        vocab.reverse.end());
    nlohmann::json m{
        {"format", kDatasetMagic},
        {"session_count", sessions.size()},
        {"event_count", event_count()},
        {"skip_count", skip_count()},
        {"skip_rate", skip_rate()},
        {"vocab_size", vocab.real_item_count()},
        {"dataset_hash", hex64(content_hash())},
        {"vocab_hash", hex64(vocab.content_hash())},
        {"vocabulary", real_items},
        {"sessions_file", prefix + ".sessions.txt"},
        {"ground_truth", truth.has_value() ? nlohmann::json(prefix + ".truth.bin")
                                           : nlohmann::json(nullptr)},
        {"source", source},
    };
    return m;
}

void Dataset::save(const std::string& prefix) const {
    write_file(prefix + ".sessions.txt", serialize_sessions(sessions));
    if (truth.has_value()) write_file(prefix + ".truth.bin", serialize_truth(*truth));
    write_file(prefix + ".manifest.json", manifest(prefix).dump(2) + "\n");
}

Dataset Dataset::load(const std::string& prefix) {
    std::string manifest_path = prefix + ".manifest.json";
    if (!file_exists(manifest_path)) fail_config("dataset manifest not found: " + manifest_path);
    auto m = nlohmann::json::parse(read_file(manifest_path));
    if (m.value("format", "") != kDatasetMagic)
        fail_integrity("dataset manifest: unsupported format tag");

    Dataset ds;
    for (const auto& key : m.at("vocabulary")) ds.vocab.add(key.get<std::string>());
    ds.sessions = parse_sessions(read_file(m.at("sessions_file").get<std::string>()),
                                 ds.vocab.size());
    if (m.contains("source")) ds.source = m["source"];
    if (m.contains("ground_truth") && !m["ground_truth"].is_null())
        ds.truth = parse_truth(read_file(m["ground_truth"].get<std::string>()));

    if (m.contains("dataset_hash")) {
        std::string expect = m["dataset_hash"].get<std::string>();
        if (expect != hex64(ds.content_hash()))
            fail_integrity("dataset hash mismatch for " + prefix);
    }
    return ds;
}

}  // namespace skiprec
