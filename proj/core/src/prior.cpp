#include "latsep/prior.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "latsep/io.hpp"

namespace latsep {

NGramPrior train_ngram(const std::vector<TokenSeq>& corpus, int k, int order,
                       double delta) {
    if (corpus.empty()) throw ValidationError("train_ngram: empty corpus");
    if (k < 1) throw ValidationError("train_ngram: k must be positive");
    if (order < 1) throw ValidationError("train_ngram: order must be at least 1");
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
        throw ValidationError("train_ngram: delta must be finite and >= 0");
    }

    NGramPrior prior;
    prior.k = k;
    prior.order = order;
    prior.delta = delta;

    // Every context length up to order-1 is counted, so truncated queries
    // near the start of a sequence see the same statistics at every order.
    for (const TokenSeq& z : corpus) {
        check_tokens(z, k, "train_ngram sequence");
        for (std::size_t s = 0; s < z.size(); ++s) {
            const int max_ctx = std::min<int>(static_cast<int>(s), order - 1);
            for (int len = 0; len <= max_ctx; ++len) {
                TokenSeq context(z.begin() + (s - len), z.begin() + s);
                auto [it, inserted] = prior.contexts.try_emplace(
                    std::move(context), std::vector<std::int64_t>(k, 0));
                ++it->second[z[s]];
            }
        }
    }
    return prior;
}

std::vector<double> conditional(const NGramPrior& prior, const TokenSeq& context) {
    for (Token t : context) {
        if (t < 0 || t >= prior.k) {
            throw ValidationError("conditional: context token out of range");
        }
    }
    const int ctx_len = std::min<int>(static_cast<int>(context.size()), prior.order - 1);
    const TokenSeq truncated(context.end() - ctx_len, context.end());

    const auto it = prior.contexts.find(truncated);
    std::vector<double> dist(prior.k, 0.0);
    if (it == prior.contexts.end()) {
        std::fill(dist.begin(), dist.end(), 1.0 / prior.k);
        return dist;
    }
    std::int64_t total = 0;
    for (std::int64_t c : it->second) total += c;
    const double denom = static_cast<double>(total) + prior.delta * prior.k;
    for (int t = 0; t < prior.k; ++t) {
        dist[t] = (static_cast<double>(it->second[t]) + prior.delta) / denom;
    }
    return dist;
}

double sequence_logprob(const NGramPrior& prior, const TokenSeq& z) {
    check_tokens(z, prior.k, "sequence_logprob input");
    double logp = 0.0;
    for (std::size_t s = 0; s < z.size(); ++s) {
        const TokenSeq prefix(z.begin(), z.begin() + s);
        logp += std::log(conditional(prior, prefix)[z[s]]);
    }
    return logp;
}

void save_prior(const NGramPrior& prior, const std::string& path) {
    nlohmann::json contexts = nlohmann::json::array();
    for (const auto& [ctx, counts] : prior.contexts) {
        nlohmann::json cells = nlohmann::json::array();
        for (int t = 0; t < prior.k; ++t) {
            if (counts[t] > 0) cells.push_back({t, counts[t]});
        }
        contexts.push_back({ctx, std::move(cells)});
    }
    nlohmann::json j;
    j["k"] = prior.k;
    j["order"] = prior.order;
    j["delta"] = prior.delta;
    j["contexts"] = std::move(contexts);
    write_text_file(j.dump(2) + "\n", path);
}

NGramPrior load_prior(const std::string& path) {
    try {
        const nlohmann::json j = nlohmann::json::parse(read_text_file(path));
        NGramPrior prior;
        prior.k = j.at("k").get<int>();
        prior.order = j.at("order").get<int>();
        prior.delta = j.at("delta").get<double>();
        if (prior.k < 1 || prior.order < 1 || !(prior.delta >= 0.0)) {
            throw ModelError(path + ": invalid prior parameters");
        }
        for (const auto& c : j.at("contexts")) {
            if (!c.is_array() || c.size() != 2) throw ModelError(path + ": bad context");
            TokenSeq ctx = c[0].get<TokenSeq>();
            if (static_cast<int>(ctx.size()) >= prior.order) {
                throw ModelError(path + ": context longer than order allows");
            }
            for (Token t : ctx) {
                if (t < 0 || t >= prior.k) throw ModelError(path + ": context token out of range");
            }
            std::vector<std::int64_t> counts(prior.k, 0);
            for (const auto& cell : c[1]) {
                const Token t = cell[0].get<Token>();
                const std::int64_t n = cell[1].get<std::int64_t>();
                if (t < 0 || t >= prior.k || n <= 0) throw ModelError(path + ": bad count cell");
                counts[t] = n;
            }
            if (!prior.contexts.emplace(std::move(ctx), std::move(counts)).second) {
                throw ModelError(path + ": duplicate context");
            }
        }
        return prior;
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(path + ": malformed prior file (" + e.what() + ")");
    }
}

}  // namespace latsep
