#include "latsep/separator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "latsep/datagen.hpp"
#include "latsep/metrics.hpp"
#include "latsep/rng.hpp"

namespace latsep {

SeparationConfig parse_separation_config(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("malformed separation config (") + e.what() + ")");
    }
    try {
        SeparationConfig cfg;
        cfg.lambda = j.at("lambda").get<double>();
        const auto& sampler = j.at("sampler");
        const std::string kind = sampler.at("kind").get<std::string>();
        if (kind == "greedy") {
            cfg.sampler = SamplerKind::greedy;
        } else if (kind == "ancestral") {
            cfg.sampler = SamplerKind::ancestral;
        } else if (kind == "topk") {
            cfg.sampler = SamplerKind::topk;
            cfg.topk_k = sampler.at("k").get<int>();
        } else if (kind == "beam") {
            cfg.sampler = SamplerKind::beam;
            cfg.beam_width = sampler.at("b").get<int>();
        } else {
            throw ValidationError("separation config: unknown sampler kind '" + kind + "'");
        }
        if (j.contains("num_candidates")) cfg.num_candidates = j.at("num_candidates").get<int>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();

        if (!std::isfinite(cfg.lambda) || cfg.lambda < 0.0) {
            throw ValidationError("separation config: lambda must be finite and >= 0");
        }
        if (cfg.num_candidates < 1) {
            throw ValidationError("separation config: num_candidates must be >= 1");
        }
        if (cfg.sampler == SamplerKind::topk && cfg.topk_k < 1) {
            throw ValidationError("separation config: top-k k must be >= 1");
        }
        if (cfg.sampler == SamplerKind::beam && cfg.beam_width < 1) {
            throw ValidationError("separation config: beam width must be >= 1");
        }
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("malformed separation config (") + e.what() + ")");
    }
}

std::string separation_config_json(const SeparationConfig& cfg) {
    nlohmann::json sampler;
    switch (cfg.sampler) {
        case SamplerKind::greedy: sampler["kind"] = "greedy"; break;
        case SamplerKind::ancestral: sampler["kind"] = "ancestral"; break;
        case SamplerKind::topk:
            sampler["kind"] = "topk";
            sampler["k"] = cfg.topk_k;
            break;
        case SamplerKind::beam:
            sampler["kind"] = "beam";
            sampler["b"] = cfg.beam_width;
            break;
    }
    nlohmann::json j;
    j["lambda"] = cfg.lambda;
    j["sampler"] = std::move(sampler);
    j["num_candidates"] = cfg.num_candidates;
    j["seed"] = cfg.seed;
    return j.dump();
}

LogMatrix posterior_step(const std::vector<double>& p1,
                         const std::vector<double>& p2,
                         const LogLikelihoodSlice& ll, double lambda) {
    const int k = static_cast<int>(p1.size());
    if (static_cast<int>(p2.size()) != k || ll.k != k) {
        throw ValidationError("posterior_step: dimension mismatch");
    }
    std::vector<double> lp1(k), lp2(k);
    for (int a = 0; a < k; ++a) lp1[a] = std::log(p1[a]);
    for (int b = 0; b < k; ++b) lp2[b] = std::log(p2[b]);

    LogMatrix post(k);
    const double base = lambda * ll.floor_logp;
    for (int a = 0; a < k; ++a) {
        double* row = post.data.data() + static_cast<std::size_t>(a) * k;
        const double la = lp1[a] + base;
        for (int b = 0; b < k; ++b) row[b] = la + lp2[b];
    }
    for (const auto& [a, b, logp] : ll.entries) {
        post.at(a, b) = lp1[a] + lp2[b] + lambda * logp;
    }
    return post;
}

std::pair<Token, Token> greedy_select(const LogMatrix& post) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < post.data.size(); ++i) {
        if (post.data[i] > post.data[best]) best = i;
    }
    return {static_cast<Token>(best / post.k), static_cast<Token>(best % post.k)};
}

namespace {

// One categorical draw over the listed cells, walked in index order after
// max-shifted exponentiation. Consumes exactly one engine draw.
std::size_t draw_cell(const std::vector<double>& values,
                      const std::vector<std::size_t>& cells,
                      std::mt19937_64& rng) {
    double max_v = -std::numeric_limits<double>::infinity();
    for (std::size_t c : cells) max_v = std::max(max_v, values[c]);

    const double u = uniform_unit(rng);
    if (!std::isfinite(max_v)) {
        // Degenerate all -inf matrix: uniform over the kept cells.
        return cells[static_cast<std::size_t>(u * static_cast<double>(cells.size()))];
    }
    double total = 0.0;
    for (std::size_t c : cells) total += std::exp(values[c] - max_v);

    const double target = u * total;
    double running = 0.0;
    std::size_t chosen = cells.back();
    for (std::size_t c : cells) {
        running += std::exp(values[c] - max_v);
        if (running > target) {
            chosen = c;
            break;
        }
    }
    return chosen;
}

std::vector<std::size_t> all_cells(std::size_t n) {
    std::vector<std::size_t> cells(n);
    std::iota(cells.begin(), cells.end(), std::size_t{0});
    return cells;
}

}  // namespace

std::pair<Token, Token> ancestral_sample(const LogMatrix& post,
                                         std::mt19937_64& rng) {
    const std::size_t cell = draw_cell(post.data, all_cells(post.data.size()), rng);
    return {static_cast<Token>(cell / post.k), static_cast<Token>(cell % post.k)};
}

std::pair<Token, Token> topk_sample(const LogMatrix& post, int kk,
                                    std::mt19937_64& rng) {
    const std::size_t n = post.data.size();
    if (kk < 1 || static_cast<std::size_t>(kk) > n) {
        throw ValidationError("topk_sample: k must be in [1, K^2]");
    }
    std::vector<std::size_t> order = all_cells(n);
    const auto better = [&post](std::size_t lhs, std::size_t rhs) {
        if (post.data[lhs] != post.data[rhs]) return post.data[lhs] > post.data[rhs];
        return lhs < rhs;
    };
    std::nth_element(order.begin(), order.begin() + (kk - 1), order.end(), better);
    order.resize(kk);
    std::sort(order.begin(), order.end());  // walk kept cells in index order

    const std::size_t cell = draw_cell(post.data, order, rng);
    return {static_cast<Token>(cell / post.k), static_cast<Token>(cell % post.k)};
}

std::vector<Hypothesis> beam_step(const std::vector<Hypothesis>& beams,
                                  const std::vector<LogMatrix>& post_per_beam,
                                  int width) {
    if (beams.empty()) throw ValidationError("beam_step: no hypotheses");
    if (post_per_beam.size() != beams.size()) {
        throw ValidationError("beam_step: one posterior matrix per beam required");
    }
    if (width < 1) throw ValidationError("beam_step: beam width must be >= 1");

    struct Candidate {
        double score;
        std::uint32_t parent;
        Token a;
        Token b;
    };
    const int k = post_per_beam.front().k;
    std::vector<Candidate> cands;
    cands.reserve(beams.size() * static_cast<std::size_t>(k) * k);
    for (std::uint32_t i = 0; i < beams.size(); ++i) {
        const LogMatrix& post = post_per_beam[i];
        for (Token a = 0; a < k; ++a) {
            for (Token b = 0; b < k; ++b) {
                cands.push_back({beams[i].logscore + post.at(a, b), i, a, b});
            }
        }
    }

    const auto better = [](const Candidate& lhs, const Candidate& rhs) {
        if (lhs.score != rhs.score) return lhs.score > rhs.score;
        if (lhs.parent != rhs.parent) return lhs.parent < rhs.parent;
        if (lhs.a != rhs.a) return lhs.a < rhs.a;
        return lhs.b < rhs.b;
    };
    const std::size_t keep = std::min<std::size_t>(width, cands.size());
    std::nth_element(cands.begin(), cands.begin() + (keep - 1), cands.end(), better);
    cands.resize(keep);
    std::sort(cands.begin(), cands.end(), better);

    std::vector<Hypothesis> next;
    next.reserve(keep);
    for (const Candidate& c : cands) {
        Hypothesis h = beams[c.parent];
        h.z1.push_back(c.a);
        h.z2.push_back(c.b);
        h.logscore = c.score;
        next.push_back(std::move(h));
    }
    return next;
}

namespace {

void check_latent_inputs(const TokenSeq& m, const PriorPair& priors,
                         const LikelihoodModel& lik) {
    if (priors.first.k != lik.k || priors.second.k != lik.k) {
        throw ModelError("separate: prior and likelihood k mismatch");
    }
    check_tokens(m, lik.k, "mixture tokens");
}

// Slices reused across steps and candidates of one inference call.
class SliceCache {
public:
    SliceCache(const LikelihoodModel& lik, const TokenSeq& m) {
        for (Token t : m) {
            if (!cache_.count(t)) cache_.emplace(t, slice(lik, t));
        }
    }
    const LogLikelihoodSlice& at(Token t) const { return cache_.at(t); }

private:
    std::unordered_map<Token, LogLikelihoodSlice> cache_;
};

}  // namespace

LatentSeparation greedy_pass(const TokenSeq& m, const PriorPair& priors,
                             const LikelihoodModel& lik, double lambda) {
    check_latent_inputs(m, priors, lik);
    const SliceCache slices(lik, m);
    LatentSeparation out;
    for (Token ms : m) {
        const auto p1 = conditional(priors.first, out.z1);
        const auto p2 = conditional(priors.second, out.z2);
        const LogMatrix post = posterior_step(p1, p2, slices.at(ms), lambda);
        const auto [a, b] = greedy_select(post);
        out.logscore += post.at(a, b);
        out.z1.push_back(a);
        out.z2.push_back(b);
    }
    return out;
}

LatentSeparation stochastic_pass(const TokenSeq& m, const PriorPair& priors,
                                 const LikelihoodModel& lik, double lambda,
                                 SamplerKind kind, int topk_k,
                                 std::mt19937_64& rng) {
    check_latent_inputs(m, priors, lik);
    const SliceCache slices(lik, m);
    LatentSeparation out;
    for (Token ms : m) {
        const auto p1 = conditional(priors.first, out.z1);
        const auto p2 = conditional(priors.second, out.z2);
        const LogMatrix post = posterior_step(p1, p2, slices.at(ms), lambda);
        const auto [a, b] = kind == SamplerKind::topk
                                ? topk_sample(post, topk_k, rng)
                                : ancestral_sample(post, rng);
        out.logscore += post.at(a, b);
        out.z1.push_back(a);
        out.z2.push_back(b);
    }
    return out;
}

std::vector<Hypothesis> run_beam(const TokenSeq& m, const PriorPair& priors,
                                 const LikelihoodModel& lik, double lambda,
                                 int width) {
    check_latent_inputs(m, priors, lik);
    if (width < 1) throw ValidationError("run_beam: beam width must be >= 1");
    const SliceCache slices(lik, m);

    std::vector<Hypothesis> beams{Hypothesis{}};
    for (Token ms : m) {
        std::vector<LogMatrix> posts;
        posts.reserve(beams.size());
        for (const Hypothesis& h : beams) {
            const auto p1 = conditional(priors.first, h.z1);
            const auto p2 = conditional(priors.second, h.z2);
            posts.push_back(posterior_step(p1, p2, slices.at(ms), lambda));
        }
        beams = beam_step(beams, posts, width);
    }
    return beams;
}

SeparationResult separate(const Signal& y, const PriorPair& priors,
                          const LikelihoodModel& lik, const Codebook& codec,
                          const SeparationConfig& cfg) {
    if (codec.k != lik.k) throw ModelError("separate: codec and likelihood k mismatch");
    const TokenSeq m = encode(codec, y);

    LatentSeparation best;
    Signal best_x1, best_x2;
    double best_residual = std::numeric_limits<double>::infinity();

    const auto finish = [&](const LatentSeparation& latent) {
        Signal x1 = decode(codec, latent.z1);
        Signal x2 = decode(codec, latent.z2);
        const double residual = l2_distance(mix(x1, x2), y);
        if (residual < best_residual) {
            best_residual = residual;
            best = latent;
            best_x1 = std::move(x1);
            best_x2 = std::move(x2);
        }
    };

    switch (cfg.sampler) {
        case SamplerKind::greedy:
            finish(greedy_pass(m, priors, lik, cfg.lambda));
            break;
        case SamplerKind::beam: {
            const auto beams = run_beam(m, priors, lik, cfg.lambda, cfg.beam_width);
            finish({beams.front().z1, beams.front().z2, beams.front().logscore});
            break;
        }
        case SamplerKind::ancestral:
        case SamplerKind::topk: {
            std::mt19937_64 rng(cfg.seed);
            for (int c = 0; c < cfg.num_candidates; ++c) {
                finish(stochastic_pass(m, priors, lik, cfg.lambda, cfg.sampler,
                                       cfg.topk_k, rng));
            }
            break;
        }
    }

    return SeparationResult{std::move(best_x1), std::move(best_x2),
                            std::move(best.z1), std::move(best.z2),
                            best.logscore, best_residual};
}

}  // namespace latsep
