#include "latsep/likelihood.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "latsep/datagen.hpp"
#include "latsep/io.hpp"

namespace latsep {

namespace {
const double kFloorLogProb = std::log(1e-12);
}

void CountTensor::increment(Token a, Token b, Token m) {
    entries[{a, b, m}] += 1;
    entries[{b, a, m}] += 1;
    total += 2;
}

void accumulate_pair(CountTensor& f, const Signal& x1, const Signal& x2,
                     const Codebook& codec) {
    if (x1.size() != x2.size()) {
        throw ValidationError("accumulate_pair: paired signals differ in length (" +
                              std::to_string(x1.size()) + " vs " +
                              std::to_string(x2.size()) + ")");
    }
    const TokenSeq z1 = encode(codec, x1);
    const TokenSeq z2 = encode(codec, x2);
    const TokenSeq m = encode(codec, mix(x1, x2));
    for (std::size_t s = 0; s < m.size(); ++s) {
        f.increment(z1[s], z2[s], m[s]);
    }
}

CountTensor build_counts(const std::vector<std::pair<Signal, Signal>>& pairs,
                         const Codebook& codec) {
    CountTensor f;
    f.k = codec.k;
    for (const auto& [x1, x2] : pairs) accumulate_pair(f, x1, x2, codec);
    return f;
}

CountTensor merge_counts(const CountTensor& a, const CountTensor& b) {
    if (a.k != b.k) throw ValidationError("merge_counts: k mismatch");
    CountTensor out = a;
    for (const auto& [triple, count] : b.entries) out.entries[triple] += count;
    out.total += b.total;
    return out;
}

double density(const CountTensor& f) {
    if (f.k == 0) return 0.0;
    const double cube = static_cast<double>(f.k) * f.k * f.k;
    return 100.0 * static_cast<double>(f.entries.size()) / cube;
}

double density(const LikelihoodModel& p) {
    if (p.k == 0) return 0.0;
    std::size_t stored = 0;
    for (const auto& [ab, row] : p.rows) stored += row.size();
    const double cube = static_cast<double>(p.k) * p.k * p.k;
    return 100.0 * static_cast<double>(stored) / cube;
}

LikelihoodModel normalize(const CountTensor& f) {
    LikelihoodModel p;
    p.k = f.k;
    p.floor_logp = kFloorLogProb;

    // entries are sorted by (a, b, m), so each row arrives contiguously
    auto it = f.entries.begin();
    while (it != f.entries.end()) {
        const Token a = (*it).first[0];
        const Token b = (*it).first[1];
        auto row_end = it;
        std::int64_t row_sum = 0;
        while (row_end != f.entries.end() && (*row_end).first[0] == a &&
               (*row_end).first[1] == b) {
            row_sum += (*row_end).second;
            ++row_end;
        }
        LikelihoodModel::SparseRow row;
        for (auto e = it; e != row_end; ++e) {
            const double prob = static_cast<double>((*e).second) /
                                static_cast<double>(row_sum);
            if (std::log(prob) <= p.floor_logp) {
                throw ModelError("normalize: stored probability at or below the floor");
            }
            row.emplace_back((*e).first[2], prob);
        }
        p.rows.emplace(std::make_pair(a, b), std::move(row));
        it = row_end;
    }
    return p;
}

double LogLikelihoodSlice::at(Token a, Token b) const {
    const auto key = std::make_tuple(a, b, 0.0);
    auto it = std::lower_bound(entries.begin(), entries.end(), key,
                               [](const auto& lhs, const auto& rhs) {
                                   return std::make_pair(std::get<0>(lhs), std::get<1>(lhs)) <
                                          std::make_pair(std::get<0>(rhs), std::get<1>(rhs));
                               });
    if (it != entries.end() && std::get<0>(*it) == a && std::get<1>(*it) == b) {
        return std::get<2>(*it);
    }
    return floor_logp;
}

LogLikelihoodSlice slice(const LikelihoodModel& p, Token m) {
    if (m < 0 || m >= p.k) {
        throw ValidationError("slice: mixture token " + std::to_string(m) +
                              " out of range [0, " + std::to_string(p.k) + ")");
    }
    LogLikelihoodSlice sl;
    sl.k = p.k;
    sl.floor_logp = p.floor_logp;
    for (const auto& [ab, row] : p.rows) {
        auto it = std::lower_bound(row.begin(), row.end(), m,
                                   [](const auto& e, Token key) { return e.first < key; });
        if (it != row.end() && it->first == m) {
            sl.entries.emplace_back(ab.first, ab.second, std::log(it->second));
        }
    }
    return sl;
}

void save_counts(const CountTensor& f, const std::string& path) {
    nlohmann::json triples = nlohmann::json::array();
    for (const auto& [triple, count] : f.entries) {
        triples.push_back({triple[0], triple[1], triple[2], count});
    }
    nlohmann::json j;
    j["k"] = f.k;
    j["triples"] = std::move(triples);
    write_text_file(j.dump(2) + "\n", path);
}

CountTensor load_counts(const std::string& path) {
    try {
        const nlohmann::json j = nlohmann::json::parse(read_text_file(path));
        CountTensor f;
        f.k = j.at("k").get<int>();
        if (f.k < 1) throw ModelError(path + ": invalid k");
        for (const auto& t : j.at("triples")) {
            if (!t.is_array() || t.size() != 4) throw ModelError(path + ": bad triple");
            const Token a = t[0].get<Token>();
            const Token b = t[1].get<Token>();
            const Token m = t[2].get<Token>();
            const std::int64_t c = t[3].get<std::int64_t>();
            if (a < 0 || a >= f.k || b < 0 || b >= f.k || m < 0 || m >= f.k || c < 0) {
                throw ModelError(path + ": triple out of range");
            }
            f.entries[{a, b, m}] = c;
            f.total += c;
        }
        for (const auto& [triple, count] : f.entries) {
            auto mirror = f.entries.find({triple[1], triple[0], triple[2]});
            if (mirror == f.entries.end() || mirror->second != count) {
                throw ModelError(path + ": counts not symmetric in (a, b)");
            }
        }
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(path + ": malformed counts file (" + e.what() + ")");
    }
}

void save_likelihood(const LikelihoodModel& p, const std::string& path) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [ab, row] : p.rows) {
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& [m, prob] : row) cells.push_back({m, prob});
        rows.push_back({ab.first, ab.second, std::move(cells)});
    }
    nlohmann::json j;
    j["k"] = p.k;
    j["floor_logp"] = p.floor_logp;
    j["rows"] = std::move(rows);
    write_text_file(j.dump(2) + "\n", path);
}

LikelihoodModel load_likelihood(const std::string& path) {
    try {
        const nlohmann::json j = nlohmann::json::parse(read_text_file(path));
        LikelihoodModel p;
        p.k = j.at("k").get<int>();
        p.floor_logp = j.at("floor_logp").get<double>();
        if (p.k < 1) throw ModelError(path + ": invalid k");
        for (const auto& r : j.at("rows")) {
            if (!r.is_array() || r.size() != 3) throw ModelError(path + ": bad row");
            const Token a = r[0].get<Token>();
            const Token b = r[1].get<Token>();
            if (a < 0 || a >= p.k || b < 0 || b >= p.k) {
                throw ModelError(path + ": row index out of range");
            }
            LikelihoodModel::SparseRow row;
            double sum = 0.0;
            Token prev = -1;
            for (const auto& cell : r[2]) {
                const Token m = cell[0].get<Token>();
                const double prob = cell[1].get<double>();
                if (m < 0 || m >= p.k || m <= prev) throw ModelError(path + ": bad row cells");
                if (!(prob > 0.0) || prob > 1.0) throw ModelError(path + ": bad probability");
                row.emplace_back(m, prob);
                sum += prob;
                prev = m;
            }
            if (std::abs(sum - 1.0) > 1e-9) {
                throw ModelError(path + ": row does not sum to 1");
            }
            p.rows.emplace(std::make_pair(a, b), std::move(row));
        }
        for (const auto& [ab, row] : p.rows) {
            auto mirror = p.rows.find({ab.second, ab.first});
            if (mirror == p.rows.end() || mirror->second != row) {
                throw ModelError(path + ": rows not symmetric in (a, b)");
            }
        }
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(path + ": malformed likelihood file (" + e.what() + ")");
    }
}

}  // namespace latsep
