#pragma once

// Reference implementations used only by the tests. Each one recomputes a
// result with plain loops and simple containers, independent of the library
// code path it validates.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <tuple>
#include <utility>
#include <vector>

#include "latsep/rng.hpp"
#include "latsep/types.hpp"

namespace oracles {

using latsep::Signal;
using latsep::Token;
using latsep::TokenSeq;

// --- codec ------------------------------------------------------------

inline std::vector<std::vector<double>> naive_patches(
    const std::vector<Signal>& corpus, int p) {
    std::vector<std::vector<double>> out;
    for (const Signal& x : corpus) {
        for (std::size_t off = 0; off + p <= x.size(); off += p) {
            out.push_back(std::vector<double>(x.begin() + off, x.begin() + off + p));
        }
    }
    return out;
}

inline double naive_dist2(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
    return d;
}

// Plain Lloyd iteration following the documented scheme: k-means++ init
// (first index from one engine draw mod n, later centers by cumulative
// squared-distance walk), ties to the smallest center, empty clusters
// reseeded to the worst-quantized unused patch, stop when the largest
// center moved less than 1e-6 or after 100 rounds, output sorted.
inline std::vector<std::vector<double>> naive_kmeans(
    const std::vector<Signal>& corpus, int k, int p, std::uint64_t seed) {
    const auto patches = naive_patches(corpus, p);
    const std::size_t n = patches.size();
    std::mt19937_64 rng(seed);

    std::vector<std::vector<double>> centers;
    centers.push_back(patches[rng() % n]);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = naive_dist2(patches[i], centers[0]);
    while (static_cast<int>(centers.size()) < k) {
        double total = 0;
        for (double d : d2) total += d;
        const double u = latsep::uniform_unit(rng) * total;
        double run = 0;
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            run += d2[i];
            if (run > u && d2[i] > 0) { pick = i; break; }
        }
        if (pick == n) {
            for (std::size_t i = n; i-- > 0;) {
                if (d2[i] > 0) { pick = i; break; }
            }
        }
        centers.push_back(patches[pick]);
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], naive_dist2(patches[i], centers.back()));
        }
    }

    for (int round = 0; round < 100; ++round) {
        std::vector<int> owner(n);
        std::vector<double> best(n);
        for (std::size_t i = 0; i < n; ++i) {
            int who = 0;
            double bd = naive_dist2(patches[i], centers[0]);
            for (int c = 1; c < k; ++c) {
                const double d = naive_dist2(patches[i], centers[c]);
                if (d < bd) { bd = d; who = c; }
            }
            owner[i] = who;
            best[i] = bd;
        }
        std::vector<std::vector<double>> fresh(k, std::vector<double>(p, 0.0));
        std::vector<long> members(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (int j = 0; j < p; ++j) fresh[owner[i]][j] += patches[i][j];
            ++members[owner[i]];
        }
        std::vector<char> taken(n, 0);
        for (int c = 0; c < k; ++c) {
            if (members[c] > 0) {
                for (int j = 0; j < p; ++j) fresh[c][j] /= members[c];
            } else {
                std::size_t far = 0;
                double fd = -1;
                for (std::size_t i = 0; i < n; ++i) {
                    if (!taken[i] && best[i] > fd) { fd = best[i]; far = i; }
                }
                taken[far] = 1;
                fresh[c] = patches[far];
            }
        }
        double shift = 0;
        for (int c = 0; c < k; ++c) {
            shift = std::max(shift, std::sqrt(naive_dist2(fresh[c], centers[c])));
        }
        centers = fresh;
        if (shift < 1e-6) break;
    }
    std::sort(centers.begin(), centers.end());
    return centers;
}

// Exhaustive nearest-neighbor search per patch.
inline TokenSeq naive_encode(const std::vector<std::vector<double>>& codes,
                             const Signal& x, int p) {
    TokenSeq z;
    for (std::size_t off = 0; off + p <= x.size(); off += p) {
        const std::vector<double> patch(x.begin() + off, x.begin() + off + p);
        Token best = 0;
        double bd = naive_dist2(patch, codes[0]);
        for (std::size_t c = 1; c < codes.size(); ++c) {
            const double d = naive_dist2(patch, codes[c]);
            if (d < bd) { bd = d; best = static_cast<Token>(c); }
        }
        z.push_back(best);
    }
    return z;
}

// --- likelihood -------------------------------------------------------

using TripleCounts = std::map<std::array<Token, 3>, std::int64_t>;

// Recounts latent triples from scratch: re-encodes with naive_encode and
// walks every position with both addend orders.
inline TripleCounts naive_recount(
    const std::vector<std::pair<Signal, Signal>>& pairs,
    const std::vector<std::vector<double>>& codes, int p) {
    TripleCounts counts;
    for (const auto& [x1, x2] : pairs) {
        Signal y(x1.size());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = (x1[i] + x2[i]) / 2.0;
        const TokenSeq z1 = naive_encode(codes, x1, p);
        const TokenSeq z2 = naive_encode(codes, x2, p);
        const TokenSeq m = naive_encode(codes, y, p);
        for (std::size_t s = 0; s < m.size(); ++s) {
            counts[{z1[s], z2[s], m[s]}] += 1;
            counts[{z2[s], z1[s], m[s]}] += 1;
        }
    }
    return counts;
}

// --- priors -----------------------------------------------------------

struct NaiveNgram {
    int k;
    int order;
    double delta;
    std::map<TokenSeq, std::map<Token, std::int64_t>> table;
};

inline NaiveNgram naive_train(const std::vector<TokenSeq>& corpus, int k,
                              int order, double delta) {
    NaiveNgram m{k, order, delta, {}};
    for (const TokenSeq& z : corpus) {
        for (std::size_t s = 0; s < z.size(); ++s) {
            const int longest = std::min<int>(static_cast<int>(s), order - 1);
            for (int len = 0; len <= longest; ++len) {
                const TokenSeq ctx(z.begin() + (s - len), z.begin() + s);
                m.table[ctx][z[s]] += 1;
            }
        }
    }
    return m;
}

inline std::vector<double> naive_conditional(const NaiveNgram& m,
                                             const TokenSeq& context) {
    const int len = std::min<int>(static_cast<int>(context.size()), m.order - 1);
    const TokenSeq ctx(context.end() - len, context.end());
    std::vector<double> dist(m.k, 1.0 / m.k);
    const auto it = m.table.find(ctx);
    if (it == m.table.end()) return dist;
    double total = 0;
    for (const auto& [t, c] : it->second) total += static_cast<double>(c);
    for (Token t = 0; t < m.k; ++t) {
        double count = 0;
        const auto cit = it->second.find(t);
        if (cit != it->second.end()) count = static_cast<double>(cit->second);
        dist[t] = (count + m.delta) / (total + m.delta * m.k);
    }
    return dist;
}

inline double naive_seq_logprob(const NaiveNgram& m, const TokenSeq& z) {
    double lp = 0;
    for (std::size_t s = 0; s < z.size(); ++s) {
        const TokenSeq prefix(z.begin(), z.begin() + s);
        lp += std::log(naive_conditional(m, prefix)[z[s]]);
    }
    return lp;
}

// --- samplers ---------------------------------------------------------

// Normalized probabilities of a flat log-score array.
inline std::vector<double> naive_softmax(const std::vector<double>& scores) {
    const double mx = *std::max_element(scores.begin(), scores.end());
    std::vector<double> probs(scores.size());
    double total = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        probs[i] = std::exp(scores[i] - mx);
        total += probs[i];
    }
    for (double& p : probs) p /= total;
    return probs;
}

inline double total_variation(const std::vector<double>& a,
                              const std::vector<double>& b) {
    double tv = 0;
    for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
    return 0.5 * tv;
}

// Full sort of every beam extension, the slow way.
struct NaiveExtension {
    double score;
    std::size_t parent;
    Token a;
    Token b;
};

inline std::vector<NaiveExtension> naive_beam_extensions(
    const std::vector<double>& parent_scores,
    const std::vector<std::vector<double>>& flat_posts, int k, int width) {
    std::vector<NaiveExtension> all;
    for (std::size_t i = 0; i < parent_scores.size(); ++i) {
        for (Token a = 0; a < k; ++a) {
            for (Token b = 0; b < k; ++b) {
                all.push_back({parent_scores[i] + flat_posts[i][a * k + b], i, a, b});
            }
        }
    }
    std::sort(all.begin(), all.end(), [](const NaiveExtension& x, const NaiveExtension& y) {
        if (x.score != y.score) return x.score > y.score;
        if (x.parent != y.parent) return x.parent < y.parent;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    if (all.size() > static_cast<std::size_t>(width)) all.resize(width);
    return all;
}

// --- datagen ----------------------------------------------------------

// Re-derivation of the documented generator streams.
inline Signal naive_markov_signal(const std::vector<double>& levels,
                                  double persistence, double amplitude, int n,
                                  std::uint64_t engine_seed) {
    std::mt19937_64 rng(engine_seed);
    std::size_t state = rng() % levels.size();
    Signal x(n);
    for (int i = 0; i < n; ++i) {
        if (i > 0 && latsep::uniform_unit(rng) >= persistence) {
            state = rng() % levels.size();
        }
        x[i] = std::clamp(levels[state] * amplitude, -1.0, 1.0);
    }
    return x;
}

inline Signal naive_tone_signal(const std::vector<double>& freqs,
                                double amplitude, int n,
                                std::uint64_t engine_seed) {
    std::mt19937_64 rng(engine_seed);
    double f[2], ph[2];
    for (int t = 0; t < 2; ++t) {
        f[t] = freqs[rng() % freqs.size()];
        ph[t] = latsep::uniform_unit(rng) * 2.0 * 3.14159265358979323846;
    }
    Signal x(n);
    for (int i = 0; i < n; ++i) {
        const double v = std::sin(2.0 * 3.14159265358979323846 * f[0] * i / n + ph[0]) +
                         std::sin(2.0 * 3.14159265358979323846 * f[1] * i / n + ph[1]);
        x[i] = std::clamp(amplitude * v / 2.0, -1.0, 1.0);
    }
    return x;
}

// --- misc -------------------------------------------------------------

inline double naive_psnr(const Signal& est, const Signal& ref, double peak) {
    double acc = 0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        acc += (est[i] - ref[i]) * (est[i] - ref[i]);
    }
    const double mse = acc / static_cast<double>(est.size());
    if (mse == 0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

}  // namespace oracles
