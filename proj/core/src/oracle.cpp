#include "latsep/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace latsep {

std::size_t seq_index(const TokenSeq& z, int k) {
    std::size_t idx = 0;
    for (Token t : z) idx = idx * k + static_cast<std::size_t>(t);
    return idx;
}

TokenSeq seq_from_index(std::size_t index, int k, int s) {
    TokenSeq z(s);
    for (int pos = s - 1; pos >= 0; --pos) {
        z[pos] = static_cast<Token>(index % k);
        index /= k;
    }
    return z;
}

PosteriorTable exact_posterior(const TokenSeq& m, const PriorPair& priors,
                               const LikelihoodModel& lik, double lambda) {
    if (priors.first.k != lik.k || priors.second.k != lik.k) {
        throw ModelError("exact_posterior: k mismatch");
    }
    const int k = lik.k;
    const int s = static_cast<int>(m.size());
    check_tokens(m, k, "exact_posterior mixture");

    double size = 1.0;
    for (int i = 0; i < 2 * s; ++i) size *= k;
    if (size > 1e7) {
        throw ValidationError("exact_posterior: instance too large (k^(2s) > 1e7)");
    }
    std::size_t seqs = 1;
    for (int i = 0; i < s; ++i) seqs *= k;

    std::vector<double> lp1(seqs), lp2(seqs);
    for (std::size_t i = 0; i < seqs; ++i) {
        const TokenSeq z = seq_from_index(i, k, s);
        lp1[i] = sequence_logprob(priors.first, z);
        lp2[i] = sequence_logprob(priors.second, z);
    }

    std::vector<LogLikelihoodSlice> slices;
    slices.reserve(s);
    for (Token t : m) slices.push_back(slice(lik, t));

    PosteriorTable table;
    table.k = k;
    table.s = s;
    table.scores.resize(seqs * seqs);

    std::vector<TokenSeq> seqs_cache(seqs);
    for (std::size_t i = 0; i < seqs; ++i) seqs_cache[i] = seq_from_index(i, k, s);

    for (std::size_t i1 = 0; i1 < seqs; ++i1) {
        const TokenSeq& z1 = seqs_cache[i1];
        for (std::size_t i2 = 0; i2 < seqs; ++i2) {
            const TokenSeq& z2 = seqs_cache[i2];
            double ll = 0.0;
            for (int pos = 0; pos < s; ++pos) ll += slices[pos].at(z1[pos], z2[pos]);
            table.scores[i1 * seqs + i2] = lp1[i1] + lp2[i2] + lambda * ll;
        }
    }

    // log-sum-exp with max shift; floor-heavy tables would underflow a
    // naive sum
    double max_score = -std::numeric_limits<double>::infinity();
    for (double v : table.scores) max_score = std::max(max_score, v);
    double acc = 0.0;
    for (double v : table.scores) acc += std::exp(v - max_score);
    table.log_partition = max_score + std::log(acc);
    return table;
}

std::pair<TokenSeq, TokenSeq> exact_map(const PosteriorTable& table) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < table.scores.size(); ++i) {
        if (table.scores[i] > table.scores[best]) best = i;
    }
    std::size_t seqs = 1;
    for (int i = 0; i < table.s; ++i) seqs *= table.k;
    return {seq_from_index(best / seqs, table.k, table.s),
            seq_from_index(best % seqs, table.k, table.s)};
}

double pair_score(const PosteriorTable& table, const TokenSeq& z1,
                  const TokenSeq& z2) {
    std::size_t seqs = 1;
    for (int i = 0; i < table.s; ++i) seqs *= table.k;
    return table.scores[seq_index(z1, table.k) * seqs + seq_index(z2, table.k)];
}

}  // namespace latsep
