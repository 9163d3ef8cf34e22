#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "latsep/types.hpp"

namespace latsep {

// Count-based autoregressive model over token sequences. Contexts of every
// length up to order-1 are counted, and a conditional is served from the
// longest available truncation of the query context with add-delta
// smoothing. An unseen context yields the uniform distribution.
struct NGramPrior {
    int k = 0;
    int order = 1;       // context length is order - 1
    double delta = 0.0;  // additive smoothing mass per token

    // context (length < order) -> counts over the k possible next tokens
    std::map<TokenSeq, std::vector<std::int64_t>> contexts;

    bool operator==(const NGramPrior&) const = default;
};

// Two priors driving a joint separation; the unsupervised case passes the
// same model twice.
struct PriorPair {
    const NGramPrior& first;
    const NGramPrior& second;
};

NGramPrior train_ngram(const std::vector<TokenSeq>& corpus, int k, int order,
                       double delta);

// p(next | context), context truncated to its last order-1 tokens.
// Always sums to 1: (count + delta) / (total + delta * k), or uniform when
// the truncated context is unseen and delta == 0.
std::vector<double> conditional(const NGramPrior& prior,
                                const TokenSeq& context);

// Chain-rule log probability of a whole sequence.
double sequence_logprob(const NGramPrior& prior, const TokenSeq& z);

void save_prior(const NGramPrior& prior, const std::string& path);
NGramPrior load_prior(const std::string& path);

}  // namespace latsep
