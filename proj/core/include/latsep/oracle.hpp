#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "latsep/likelihood.hpp"
#include "latsep/prior.hpp"
#include "latsep/types.hpp"

namespace latsep {

// Dense joint log-score table over every (z1, z2) pair of length-S
// sequences. Exists for cross-checking the stepwise samplers on small
// instances; refuses instances above 1e7 pairs.
struct PosteriorTable {
    int k = 0;
    int s = 0;
    std::vector<double> scores;  // index = seq_index(z1) * k^s + seq_index(z2)
    double log_partition = 0.0;
};

// Big-endian sequence index: z[0] is the most significant digit, so index
// order equals lexicographic order.
std::size_t seq_index(const TokenSeq& z, int k);
TokenSeq seq_from_index(std::size_t index, int k, int s);

// score(z1, z2) = log p1(z1) + log p2(z2) + lambda * sum_s log P[z1_s, z2_s, m_s].
PosteriorTable exact_posterior(const TokenSeq& m, const PriorPair& priors,
                               const LikelihoodModel& lik, double lambda);

// Argmax pair; ties resolve to the lexicographically smallest (z1, z2).
std::pair<TokenSeq, TokenSeq> exact_map(const PosteriorTable& table);

double pair_score(const PosteriorTable& table, const TokenSeq& z1,
                  const TokenSeq& z2);

}  // namespace latsep
