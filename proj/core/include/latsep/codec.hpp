#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "latsep/types.hpp"

namespace latsep {

// Patch codebook over 1-D signals. A signal of length N splits into
// S = N/P consecutive patches of P samples; each patch quantizes to the
// index of its nearest code. Decoding concatenates code vectors, so
// encode(decode(z)) == z for every token sequence.
struct Codebook {
    int k = 0;  // number of codes
    int p = 0;  // patch length in samples
    std::vector<std::vector<double>> codes;  // k vectors of p reals, sorted

    bool operator==(const Codebook&) const = default;
};

// Continuous per-position embeddings: S vectors of P reals, not restricted
// to codebook entries.
using DenseEmbedding = std::vector<std::vector<double>>;

// Learns k codes of length p by k-means over all non-overlapping patches of
// the corpus (k-means++ init from `seed`, Lloyd iterations until the largest
// centroid shift drops below 1e-6 or 100 iterations). Codes are sorted
// lexicographically, so the result is a deterministic function of
// (corpus, k, p, seed).
Codebook fit_codebook(const std::vector<Signal>& corpus, int k, int p,
                      std::uint64_t seed);

// Nearest-neighbor quantization, squared Euclidean distance, ties broken by
// the smaller code index.
TokenSeq encode(const Codebook& codec, const Signal& x);

Signal decode(const Codebook& codec, const TokenSeq& z);

// Linear decoder for continuous embeddings: concatenation of the vectors.
Signal decode_dense(const Codebook& codec, const DenseEmbedding& e);

// Token sequence -> its code vectors.
DenseEmbedding embed(const Codebook& codec, const TokenSeq& z);

// Signal -> its raw patches (the encoder side of decode_dense).
DenseEmbedding split_patches(const Codebook& codec, const Signal& x);

void save_codebook(const Codebook& codec, const std::string& path);
Codebook load_codebook(const std::string& path);

}  // namespace latsep
