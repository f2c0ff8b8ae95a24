#include "checkpoint.hpp"

#include <cstring>

namespace skiprec {

void Checkpoint::save(const std::string& path) const {
    nlohmann::json hdr = header;
    hdr["kind"] = kind;
    nlohmann::json index = nlohmann::json::array();
    for (const auto& spec : tensors.specs())
        index.push_back({{"name", spec.name}, {"shape", spec.shape}, {"offset", spec.offset}});
    hdr["tensors"] = index;
    std::string hdr_text = hdr.dump();

    std::string out(kCheckpointMagic);
    out += '\n';
    uint32_t len = static_cast<uint32_t>(hdr_text.size());
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((len >> (8 * i)) & 0xff));
    out += hdr_text;
    size_t old = out.size();
    out.resize(old + tensors.size() * 8);
    std::memcpy(out.data() + old, tensors.data().data(), tensors.size() * 8);
    write_file(path, out);
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::string bytes = read_file(path);
    std::string magic = std::string(kCheckpointMagic) + "\n";
    if (bytes.size() < magic.size() + 4 || bytes.compare(0, magic.size(), magic) != 0)
        fail_integrity("checkpoint: bad magic in " + path);
    size_t off = magic.size();
    uint32_t hdr_len = 0;
    for (int i = 0; i < 4; ++i)
        hdr_len |= static_cast<uint32_t>(static_cast<unsigned char>(bytes[off + i])) << (8 * i);
    off += 4;
    if (off + hdr_len > bytes.size()) fail_integrity("checkpoint: truncated header");

    Checkpoint ckpt;
    ckpt.header = nlohmann::json::parse(bytes.substr(off, hdr_len));
    off += hdr_len;
    ckpt.kind = ckpt.header.value("kind", "");
    if (ckpt.kind != "sequential" && ckpt.kind != "baseline")
        fail_integrity("checkpoint: unknown kind '" + ckpt.kind + "'");

    for (const auto& entry : ckpt.header.at("tensors")) {
        std::vector<int64_t> shape = entry.at("shape").get<std::vector<int64_t>>();
        int64_t offset = ckpt.tensors.add(entry.at("name").get<std::string>(), shape);
        if (offset != entry.at("offset").get<int64_t>())
            fail_integrity("checkpoint: tensor layout mismatch");
    }
    if (off + ckpt.tensors.size() * 8 != bytes.size())
        fail_integrity("checkpoint: tensor data size mismatch");
    std::memcpy(ckpt.tensors.data().data(), bytes.data() + off, ckpt.tensors.size() * 8);
    ckpt.header.erase("tensors");
    return ckpt;
}

}  // namespace skiprec
