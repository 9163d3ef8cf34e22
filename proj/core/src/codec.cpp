#include "latsep/codec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "latsep/io.hpp"
#include "latsep/rng.hpp"

namespace latsep {

void check_finite(const Signal& x, const std::string& what) {
    if (x.empty()) throw ValidationError(what + ": empty signal");
    for (double v : x) {
        if (!std::isfinite(v)) throw ValidationError(what + ": non-finite sample");
    }
}

void check_tokens(const TokenSeq& z, int k, const std::string& what) {
    if (z.empty()) throw ValidationError(what + ": empty token sequence");
    for (Token t : z) {
        if (t < 0 || t >= k) {
            throw ValidationError(what + ": token " + std::to_string(t) +
                                  " out of range [0, " + std::to_string(k) + ")");
        }
    }
}

namespace {

using Patch = std::vector<double>;

double dist2(const Patch& a, const Patch& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

std::vector<Patch> collect_patches(const std::vector<Signal>& corpus, int p) {
    std::vector<Patch> patches;
    for (const Signal& x : corpus) {
        check_finite(x, "fit_codebook corpus signal");
        if (x.size() % static_cast<std::size_t>(p) != 0) {
            throw ValidationError("fit_codebook: signal length " +
                                  std::to_string(x.size()) +
                                  " not divisible by patch length " +
                                  std::to_string(p));
        }
        for (std::size_t off = 0; off + p <= x.size(); off += p) {
            patches.emplace_back(x.begin() + off, x.begin() + off + p);
        }
    }
    return patches;
}

// k-means++ seeding: first center uniform, later centers proportional to the
// squared distance from the chosen set. Draw order: one engine draw for the
// first index, then one uniform per additional center.
std::vector<Patch> seed_centers(const std::vector<Patch>& patches, int k,
                                std::mt19937_64& rng) {
    const std::size_t n = patches.size();
    std::vector<Patch> centers;
    centers.reserve(k);
    centers.push_back(patches[rng() % n]);

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = dist2(patches[i], centers[0]);

    while (static_cast<int>(centers.size()) < k) {
        double total = 0.0;
        for (double d : d2) total += d;
        const double u = uniform_unit(rng) * total;
        double running = 0.0;
        std::size_t chosen = n;
        for (std::size_t i = 0; i < n; ++i) {
            running += d2[i];
            if (running > u && d2[i] > 0.0) {
                chosen = i;
                break;
            }
        }
        if (chosen == n) {  // numerical tail: last patch with positive mass
            for (std::size_t i = n; i-- > 0;) {
                if (d2[i] > 0.0) {
                    chosen = i;
                    break;
                }
            }
        }
        centers.push_back(patches[chosen]);
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], dist2(patches[i], centers.back()));
        }
    }
    return centers;
}

}  // namespace

Codebook fit_codebook(const std::vector<Signal>& corpus, int k, int p,
                      std::uint64_t seed) {
    if (k < 2) throw ValidationError("fit_codebook: k must be at least 2");
    if (p < 1) throw ValidationError("fit_codebook: patch length must be positive");
    if (corpus.empty()) throw ValidationError("fit_codebook: empty corpus");

    const std::vector<Patch> patches = collect_patches(corpus, p);

    std::set<Patch> distinct(patches.begin(), patches.end());
    if (distinct.size() < static_cast<std::size_t>(k)) {
        throw ValidationError("fit_codebook: corpus too small, only " +
                              std::to_string(distinct.size()) +
                              " distinct patches for k = " + std::to_string(k));
    }

    std::mt19937_64 rng(seed);
    std::vector<Patch> centers = seed_centers(patches, k, rng);

    const std::size_t n = patches.size();
    std::vector<int> assign(n, 0);
    std::vector<double> best_d2(n, 0.0);

    for (int iter = 0; iter < 100; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = dist2(patches[i], centers[0]);
            for (int c = 1; c < k; ++c) {
                const double d = dist2(patches[i], centers[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            assign[i] = best;
            best_d2[i] = best_d;
        }

        std::vector<Patch> next(k, Patch(p, 0.0));
        std::vector<std::int64_t> sizes(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            Patch& acc = next[assign[i]];
            for (int j = 0; j < p; ++j) acc[j] += patches[i][j];
            ++sizes[assign[i]];
        }

        std::vector<char> used(n, 0);
        for (int c = 0; c < k; ++c) {
            if (sizes[c] > 0) {
                for (int j = 0; j < p; ++j) next[c][j] /= static_cast<double>(sizes[c]);
            } else {
                // Reseed an empty cluster to the worst-quantized patch.
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (!used[i] && best_d2[i] > far_d) {
                        far_d = best_d2[i];
                        far = i;
                    }
                }
                used[far] = 1;
                next[c] = patches[far];
            }
        }

        double shift = 0.0;
        for (int c = 0; c < k; ++c) {
            shift = std::max(shift, std::sqrt(dist2(next[c], centers[c])));
        }
        centers = std::move(next);
        if (shift < 1e-6) break;
    }

    std::sort(centers.begin(), centers.end());
    for (int c = 1; c < k; ++c) {
        if (centers[c] == centers[c - 1]) {
            throw ValidationError(
                "fit_codebook: duplicate centroids; reduce k or change the seed");
        }
    }

    Codebook codec;
    codec.k = k;
    codec.p = p;
    codec.codes = std::move(centers);
    return codec;
}

TokenSeq encode(const Codebook& codec, const Signal& x) {
    check_finite(x, "encode input");
    if (x.size() % static_cast<std::size_t>(codec.p) != 0) {
        throw ValidationError("encode: signal length " + std::to_string(x.size()) +
                              " not divisible by patch length " +
                              std::to_string(codec.p));
    }
    const std::size_t s = x.size() / codec.p;
    TokenSeq z;
    z.reserve(s);
    for (std::size_t i = 0; i < s; ++i) {
        const double* patch = x.data() + i * codec.p;
        Token best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int c = 0; c < codec.k; ++c) {
            double d = 0.0;
            const std::vector<double>& code = codec.codes[c];
            for (int j = 0; j < codec.p; ++j) {
                const double diff = patch[j] - code[j];
                d += diff * diff;
            }
            if (d < best_d) {
                best_d = d;
                best = static_cast<Token>(c);
            }
        }
        z.push_back(best);
    }
    return z;
}

Signal decode(const Codebook& codec, const TokenSeq& z) {
    check_tokens(z, codec.k, "decode input");
    Signal x;
    x.reserve(z.size() * codec.p);
    for (Token t : z) {
        const std::vector<double>& code = codec.codes[t];
        x.insert(x.end(), code.begin(), code.end());
    }
    return x;
}

Signal decode_dense(const Codebook& codec, const DenseEmbedding& e) {
    if (e.empty()) throw ValidationError("decode_dense: empty embedding");
    Signal x;
    x.reserve(e.size() * codec.p);
    for (const std::vector<double>& v : e) {
        if (v.size() != static_cast<std::size_t>(codec.p)) {
            throw ValidationError("decode_dense: vector length " +
                                  std::to_string(v.size()) + " != patch length " +
                                  std::to_string(codec.p));
        }
        x.insert(x.end(), v.begin(), v.end());
    }
    return x;
}

DenseEmbedding embed(const Codebook& codec, const TokenSeq& z) {
    check_tokens(z, codec.k, "embed input");
    DenseEmbedding e;
    e.reserve(z.size());
    for (Token t : z) e.push_back(codec.codes[t]);
    return e;
}

DenseEmbedding split_patches(const Codebook& codec, const Signal& x) {
    check_finite(x, "split_patches input");
    if (x.size() % static_cast<std::size_t>(codec.p) != 0) {
        throw ValidationError("split_patches: signal length not divisible by patch length");
    }
    DenseEmbedding e;
    e.reserve(x.size() / codec.p);
    for (std::size_t off = 0; off < x.size(); off += codec.p) {
        e.emplace_back(x.begin() + off, x.begin() + off + codec.p);
    }
    return e;
}

void save_codebook(const Codebook& codec, const std::string& path) {
    nlohmann::json j;
    j["k"] = codec.k;
    j["p"] = codec.p;
    j["codes"] = codec.codes;
    write_text_file(j.dump(2) + "\n", path);
}

Codebook load_codebook(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
        Codebook codec;
        codec.k = j.at("k").get<int>();
        codec.p = j.at("p").get<int>();
        codec.codes = j.at("codes").get<std::vector<std::vector<double>>>();

        if (codec.k < 2 || codec.p < 1) throw ModelError(path + ": invalid codebook dimensions");
        if (codec.codes.size() != static_cast<std::size_t>(codec.k)) {
            throw ModelError(path + ": expected " + std::to_string(codec.k) + " codes");
        }
        for (const auto& code : codec.codes) {
            if (code.size() != static_cast<std::size_t>(codec.p)) {
                throw ModelError(path + ": code length != p");
            }
            for (double v : code) {
                if (!std::isfinite(v)) throw ModelError(path + ": non-finite code entry");
            }
        }
        std::set<std::vector<double>> distinct(codec.codes.begin(), codec.codes.end());
        if (distinct.size() != codec.codes.size()) {
            throw ModelError(path + ": duplicate codes");
        }
        return codec;
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(path + ": malformed codebook file (" + e.what() + ")");
    }
}

}  // namespace latsep
