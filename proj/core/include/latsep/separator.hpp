#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "latsep/codec.hpp"
#include "latsep/likelihood.hpp"
#include "latsep/prior.hpp"
#include "latsep/types.hpp"

namespace latsep {

enum class SamplerKind { greedy, ancestral, topk, beam };

struct SeparationConfig {
    double lambda = 3.0;           // log-likelihood scale
    SamplerKind sampler = SamplerKind::topk;
    int topk_k = 32;               // joint cells kept, 1..k*k
    int beam_width = 100;
    int num_candidates = 1;        // stochastic samplers only
    std::uint64_t seed = 0;
};

// Round-trips the config JSON: {"lambda": real, "sampler": {"kind": ...,
// "k": int?, "b": int?}, "num_candidates": int, "seed": int}.
SeparationConfig parse_separation_config(const std::string& json_text);
std::string separation_config_json(const SeparationConfig& cfg);

// Dense K x K matrix of joint log scores, row index = first source token.
struct LogMatrix {
    int k = 0;
    std::vector<double> data;  // row-major, size k * k

    explicit LogMatrix(int k_ = 0, double fill = 0.0)
        : k(k_), data(static_cast<std::size_t>(k_) * k_, fill) {}

    double at(Token a, Token b) const { return data[static_cast<std::size_t>(a) * k + b]; }
    double& at(Token a, Token b) { return data[static_cast<std::size_t>(a) * k + b]; }
};

// A pair of partial sequences with its accumulated joint log score.
struct Hypothesis {
    TokenSeq z1;
    TokenSeq z2;
    double logscore = 0.0;
};

struct SeparationResult {
    Signal x1;
    Signal x2;
    TokenSeq z1;
    TokenSeq z2;
    double logscore = 0.0;
    double residual = 0.0;  // || (x1 + x2)/2 - y ||_2
};

// Latent-domain result of one inference pass.
struct LatentSeparation {
    TokenSeq z1;
    TokenSeq z2;
    double logscore = 0.0;
};

// posterior(a, b) = ln p1[a] + ln p2[b] + lambda * ll(a, b). Not normalized.
LogMatrix posterior_step(const std::vector<double>& p1,
                         const std::vector<double>& p2,
                         const LogLikelihoodSlice& ll, double lambda);

// Argmax cell; ties resolved toward the smallest (a, then b).
std::pair<Token, Token> greedy_select(const LogMatrix& post);

// One draw from the categorical obtained by max-shifted exponentiation of
// the whole matrix.
std::pair<Token, Token> ancestral_sample(const LogMatrix& post,
                                         std::mt19937_64& rng);

// Keeps the kk highest cells (ties by index order), renormalizes, draws.
// kk == k*k reproduces ancestral_sample draw-for-draw on the same stream.
std::pair<Token, Token> topk_sample(const LogMatrix& post, int kk,
                                    std::mt19937_64& rng);

// Extends every hypothesis by one token pair and keeps the best `width`
// by accumulated score (ties by parent index, then a, then b).
std::vector<Hypothesis> beam_step(const std::vector<Hypothesis>& beams,
                                  const std::vector<LogMatrix>& post_per_beam,
                                  int width);

// Full decoding passes over a latent mixture. Exposed separately so small
// instances can be cross-checked against exhaustive enumeration.
LatentSeparation greedy_pass(const TokenSeq& m, const PriorPair& priors,
                             const LikelihoodModel& lik, double lambda);

LatentSeparation stochastic_pass(const TokenSeq& m, const PriorPair& priors,
                                 const LikelihoodModel& lik, double lambda,
                                 SamplerKind kind, int topk_k,
                                 std::mt19937_64& rng);

// All surviving hypotheses after the last step, best first.
std::vector<Hypothesis> run_beam(const TokenSeq& m, const PriorPair& priors,
                                 const LikelihoodModel& lik, double lambda,
                                 int width);

// Stepwise joint posterior decoding of a mixture signal. Stochastic samplers
// draw num_candidates full separations from one seeded stream (candidate by
// candidate, one draw per step) and return the one whose decoded sum is
// closest to y in L2; ties keep the earliest candidate.
SeparationResult separate(const Signal& y, const PriorPair& priors,
                          const LikelihoodModel& lik, const Codebook& codec,
                          const SeparationConfig& cfg);

}  // namespace latsep
