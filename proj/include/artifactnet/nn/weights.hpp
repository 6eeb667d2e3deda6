#pragma once

#include <map>
#include <string>
#include <vector>

#include "artifactnet/nn/tensor.hpp"

namespace artifactnet::nn {

// Named parameter set. Keys are unique layer paths; entries with the
// "__meta__." prefix carry config echoes rather than parameters.
struct ModelWeights {
    std::map<std::string, Tensor> entries;

    bool has(const std::string& name) const { return entries.count(name) != 0; }
};

inline constexpr const char* kWeightMagic = "ANW1";
inline constexpr std::uint32_t kWeightVersion = 1;
inline constexpr const char* kMetaPrefix = "__meta__.";

// Binary format, little-endian: magic "ANW1", u32 version, then entries
// until end of file. Entry: u32 name length, name bytes, u32 rank,
// u32 dims[rank], float32 payload (row-major). Round-trips bit-exactly.
void save_weights(const ModelWeights& w, const std::string& path);
ModelWeights load_weights(const std::string& path);

// Snapshot parameters (by name) into a ModelWeights, and write them back.
// apply_weights throws WeightError on a missing name or shape mismatch.
ModelWeights snapshot(const std::vector<ParamRef>& params);
void apply_weights(const ModelWeights& w, const std::vector<ParamRef>& params);

bool bitwise_equal(const ModelWeights& a, const ModelWeights& b);

}  // namespace artifactnet::nn
