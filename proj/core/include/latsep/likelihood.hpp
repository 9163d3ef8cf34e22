#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "latsep/codec.hpp"
#include "latsep/types.hpp"

namespace latsep {

// Sparse rank-3 frequency tensor over token triples (a, b, m): how often
// source tokens a and b were observed to mix into token m. Counts are kept
// symmetric in (a, b); a pair with a == b lands both increments on the same
// cell.
struct CountTensor {
    int k = 0;
    std::map<std::array<Token, 3>, std::int64_t> entries;  // sorted triples
    std::int64_t total = 0;

    // Records one (a, b) -> m observation together with its (b, a) mirror.
    void increment(Token a, Token b, Token m);

    bool operator==(const CountTensor&) const = default;
};

// Encodes x1, x2 and their mixture (x1 + x2) / 2, then counts one triple per
// latent position.
void accumulate_pair(CountTensor& f, const Signal& x1, const Signal& x2,
                     const Codebook& codec);

CountTensor build_counts(const std::vector<std::pair<Signal, Signal>>& pairs,
                         const Codebook& codec);

// Element-wise sum; partial tensors from sharded counting merge into the
// same result as sequential counting.
CountTensor merge_counts(const CountTensor& a, const CountTensor& b);

// Percentage of stored triples relative to the k^3 dense size.
double density(const CountTensor& f);

// Row-normalized form of the count tensor: each stored (a, b) row is a
// sparse distribution over m. Rows that were never observed carry no storage
// and every m in them scores floor_logp.
struct LikelihoodModel {
    using SparseRow = std::vector<std::pair<Token, double>>;  // sorted by m

    int k = 0;
    double floor_logp = 0.0;
    std::map<std::pair<Token, Token>, SparseRow> rows;

    bool operator==(const LikelihoodModel&) const = default;
};

LikelihoodModel normalize(const CountTensor& f);

double density(const LikelihoodModel& p);

// Sparse K x K log-probability matrix for a fixed mixture token m.
struct LogLikelihoodSlice {
    int k = 0;
    double floor_logp = 0.0;
    std::vector<std::tuple<Token, Token, double>> entries;  // sorted by (a, b)

    // log P[a, b, m]; floor_logp when the cell is unstored.
    double at(Token a, Token b) const;
};

LogLikelihoodSlice slice(const LikelihoodModel& p, Token m);

void save_counts(const CountTensor& f, const std::string& path);
CountTensor load_counts(const std::string& path);

void save_likelihood(const LikelihoodModel& p, const std::string& path);
LikelihoodModel load_likelihood(const std::string& path);

}  // namespace latsep
