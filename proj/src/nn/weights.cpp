#include "artifactnet/nn/weights.hpp"

#include <cstring>
#include <fstream>

#include "artifactnet/errors.hpp"

namespace artifactnet::nn {

namespace {

constexpr std::uint32_t kMaxNameLen = 4096;
constexpr std::uint32_t kMaxRank = 4;
constexpr std::uint64_t kMaxDim = 1u << 28;

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<char*>(b), 4);
}

bool get_u32(std::ifstream& in, std::uint32_t& v) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) return false;
    v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
        (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    return true;
}

}  // namespace

void save_weights(const ModelWeights& w, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open weight file for writing: " + path);
    out.write(kWeightMagic, 4);
    put_u32(out, kWeightVersion);
    // std::map iteration order makes the byte layout deterministic
    for (const auto& [name, t] : w.entries) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        const int rank = t.rank > 0 ? t.rank : 4;
        put_u32(out, static_cast<std::uint32_t>(rank));
        // lower-rank tensors store their trailing dims
        for (int i = 4 - rank; i < 4; ++i) put_u32(out, static_cast<std::uint32_t>(t.shape[i]));
        for (double v : t.data) {
            const float f = static_cast<float>(v);
            out.write(reinterpret_cast<const char*>(&f), 4);
        }
    }
    if (!out) throw IoError("short write: " + path);
}

ModelWeights load_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open weight file: " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kWeightMagic, 4) != 0) {
        throw FormatError("bad weight file magic in " + path);
    }
    std::uint32_t version = 0;
    if (!get_u32(in, version) || version != kWeightVersion) {
        throw FormatError("unsupported weight file version " + std::to_string(version) + " in " + path);
    }

    ModelWeights w;
    while (true) {
        std::uint32_t name_len = 0;
        if (!get_u32(in, name_len)) break;  // clean end of file
        if (name_len == 0 || name_len > kMaxNameLen) {
            throw CorruptionError("implausible entry name length in " + path);
        }
        std::string name(name_len, '\0');
        if (!in.read(name.data(), name_len)) throw CorruptionError("truncated entry name in " + path);

        std::uint32_t rank = 0;
        if (!get_u32(in, rank)) throw CorruptionError("truncated entry rank in " + path);
        if (rank == 0 || rank > kMaxRank) throw CorruptionError("implausible rank in " + path);

        std::uint64_t count = 1;
        std::array<int, 4> shape{1, 1, 1, 1};
        for (std::uint32_t i = 0; i < rank; ++i) {
            std::uint32_t d = 0;
            if (!get_u32(in, d)) throw CorruptionError("truncated dims in " + path);
            if (d == 0 || d > kMaxDim) throw CorruptionError("implausible dim " + std::to_string(d) + " in " + path);
            shape[4 - rank + i] = static_cast<int>(d);
            count *= d;
        }
        if (count > kMaxDim) throw CorruptionError("implausible entry size in " + path);

        Tensor t;
        t.shape = shape;
        t.rank = static_cast<int>(rank);
        t.data.resize(count);
        for (std::uint64_t i = 0; i < count; ++i) {
            float f;
            if (!in.read(reinterpret_cast<char*>(&f), 4)) {
                throw CorruptionError("truncated payload for '" + name + "' in " + path);
            }
            t.data[i] = static_cast<double>(f);
        }
        if (w.entries.count(name)) throw CorruptionError("duplicate entry '" + name + "' in " + path);
        w.entries.emplace(std::move(name), std::move(t));
    }
    return w;
}

ModelWeights snapshot(const std::vector<ParamRef>& params) {
    ModelWeights w;
    for (const auto& p : params) {
        if (w.entries.count(p.name)) throw WeightError("duplicate parameter name: " + p.name);
        w.entries.emplace(p.name, *p.value);
    }
    return w;
}

void apply_weights(const ModelWeights& w, const std::vector<ParamRef>& params) {
    for (const auto& p : params) {
        const auto it = w.entries.find(p.name);
        if (it == w.entries.end()) throw WeightError("missing parameter '" + p.name + "' in weight set");
        if (it->second.data.size() != p.value->data.size()) {
            throw WeightError("shape mismatch for '" + p.name + "': file has " +
                              it->second.shape_str() + ", model has " + p.value->shape_str());
        }
        p.value->data = it->second.data;
    }
}

bool bitwise_equal(const ModelWeights& a, const ModelWeights& b) {
    if (a.entries.size() != b.entries.size()) return false;
    auto ia = a.entries.begin();
    auto ib = b.entries.begin();
    for (; ia != a.entries.end(); ++ia, ++ib) {
        if (ia->first != ib->first) return false;
        if (ia->second.data.size() != ib->second.data.size()) return false;
        if (std::memcmp(ia->second.data.data(), ib->second.data.data(),
                        ia->second.data.size() * sizeof(double)) != 0) {
            return false;
        }
    }
    return true;
}

}  // namespace artifactnet::nn
