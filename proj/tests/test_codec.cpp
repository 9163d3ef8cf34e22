#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "latsep/codec.hpp"
#include "latsep/io.hpp"
#include "latsep/rng.hpp"
#include "oracles.hpp"

using namespace latsep;

namespace {

std::vector<Signal> random_corpus(int signals, int length, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Signal> corpus(signals);
    for (Signal& x : corpus) {
        x.resize(length);
        for (double& v : x) v = 2.0 * uniform_unit(rng) - 1.0;
    }
    return corpus;
}

Codebook scalar_codebook(std::vector<double> values) {
    Codebook codec;
    codec.k = static_cast<int>(values.size());
    codec.p = 1;
    for (double v : values) codec.codes.push_back({v});
    return codec;
}

}  // namespace

TEST_CASE("fit_codebook separates two distinct scalar patches") {
    const auto codec = fit_codebook({{0.0, 0.0, 1.0, 1.0}}, 2, 1, 0);
    REQUIRE(codec.codes.size() == 2);
    CHECK(codec.codes[0] == std::vector<double>{0.0});
    CHECK(codec.codes[1] == std::vector<double>{1.0});
}

TEST_CASE("fit_codebook rejects degenerate corpora") {
    CHECK_THROWS_AS(fit_codebook({{0.0, 0.0, 0.0, 0.0}}, 2, 1, 0), ValidationError);
    CHECK_THROWS_AS(fit_codebook({{0.0, 1.0, 0.5}}, 2, 2, 0), ValidationError);
    CHECK_THROWS_AS(fit_codebook({{0.0, 1.0}}, 1, 1, 0), ValidationError);
    CHECK_THROWS_AS(fit_codebook({}, 2, 1, 0), ValidationError);
}

TEST_CASE("fit_codebook matches an independent Lloyd implementation") {
    const auto corpus = random_corpus(12, 64, 7);
    const auto codec = fit_codebook(corpus, 8, 4, 7);
    const auto reference = oracles::naive_kmeans(corpus, 8, 4, 7);
    REQUIRE(codec.codes.size() == reference.size());
    for (std::size_t c = 0; c < reference.size(); ++c) {
        for (int j = 0; j < 4; ++j) {
            CHECK(codec.codes[c][j] == doctest::Approx(reference[c][j]).epsilon(1e-12));
        }
    }
}

TEST_CASE("fit_codebook is deterministic") {
    const auto corpus = random_corpus(6, 32, 3);
    CHECK(fit_codebook(corpus, 5, 2, 11) == fit_codebook(corpus, 5, 2, 11));
}

TEST_CASE("encode picks exact-match patches") {
    const auto codec = scalar_codebook({0.0, 1.0});
    CHECK(encode(codec, {0.0, 1.0, 1.0, 0.0}) == TokenSeq{0, 1, 1, 0});
}

TEST_CASE("encode breaks distance ties toward the smaller index") {
    const auto codec = scalar_codebook({0.0, 2.0});
    CHECK(encode(codec, {1.0}) == TokenSeq{0});
}

TEST_CASE("encode inverts decode for arbitrary token sequences") {
    const auto corpus = random_corpus(8, 48, 19);
    const auto codec = fit_codebook(corpus, 6, 4, 19);
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        TokenSeq z(10);
        for (Token& t : z) t = static_cast<Token>(rng() % codec.k);
        CHECK(encode(codec, decode(codec, z)) == z);
        CHECK(decode(codec, encode(codec, decode(codec, z))) == decode(codec, z));
    }
}

TEST_CASE("encode equals exhaustive nearest-neighbor search") {
    const auto corpus = random_corpus(10, 64, 23);
    const auto codec = fit_codebook(corpus, 8, 4, 23);
    std::mt19937_64 rng(5);
    Signal x(64);
    for (double& v : x) v = 2.0 * uniform_unit(rng) - 1.0;
    CHECK(encode(codec, x) == oracles::naive_encode(codec.codes, x, codec.p));
}

TEST_CASE("encoded tokens are nearest-neighbor optimal") {
    const auto corpus = random_corpus(10, 64, 29);
    const auto codec = fit_codebook(corpus, 8, 4, 29);
    std::mt19937_64 rng(6);
    Signal x(40);
    for (double& v : x) v = 2.0 * uniform_unit(rng) - 1.0;
    const TokenSeq z = encode(codec, x);
    const auto patches = split_patches(codec, x);
    for (std::size_t s = 0; s < z.size(); ++s) {
        const double chosen = oracles::naive_dist2(patches[s], codec.codes[z[s]]);
        for (int c = 0; c < codec.k; ++c) {
            CHECK(chosen <= oracles::naive_dist2(patches[s], codec.codes[c]) + 1e-15);
        }
    }
}

TEST_CASE("encode validates divisibility") {
    const auto codec = fit_codebook(random_corpus(6, 32, 2), 4, 4, 2);
    CHECK_THROWS_AS(encode(codec, Signal(10, 0.1)), ValidationError);
}

TEST_CASE("decode concatenates code patches") {
    const auto codec = scalar_codebook({0.0, 1.0});
    CHECK(decode(codec, {1, 0}) == Signal{1.0, 0.0});
    CHECK(decode(codec, {1}) == Signal{1.0});
    CHECK_THROWS_AS(decode(codec, {2}), ValidationError);
    CHECK_THROWS_AS(decode(codec, {-1}), ValidationError);
}

TEST_CASE("decode_dense is the linear concatenation map") {
    const auto corpus = random_corpus(6, 32, 31);
    const auto codec = fit_codebook(corpus, 4, 4, 31);
    std::mt19937_64 rng(8);

    TokenSeq z(6);
    for (Token& t : z) t = static_cast<Token>(rng() % codec.k);
    CHECK(decode_dense(codec, embed(codec, z)) == decode(codec, z));

    DenseEmbedding e(5, std::vector<double>(4)), f(5, std::vector<double>(4));
    for (auto& v : e)
        for (double& x : v) x = 2.0 * uniform_unit(rng) - 1.0;
    for (auto& v : f)
        for (double& x : v) x = 2.0 * uniform_unit(rng) - 1.0;

    // element-wise against a plain loop
    const Signal flat = decode_dense(codec, e);
    for (std::size_t s = 0; s < e.size(); ++s) {
        for (int j = 0; j < 4; ++j) CHECK(flat[s * 4 + j] == e[s][j]);
    }

    // linearity to 1e-12
    const double a = 1.7, b = -0.4;
    DenseEmbedding combo(5, std::vector<double>(4));
    for (std::size_t s = 0; s < e.size(); ++s) {
        for (int j = 0; j < 4; ++j) combo[s][j] = a * e[s][j] + b * f[s][j];
    }
    const Signal left = decode_dense(codec, combo);
    const Signal re = decode_dense(codec, e), rf = decode_dense(codec, f);
    for (std::size_t i = 0; i < left.size(); ++i) {
        CHECK(left[i] == doctest::Approx(a * re[i] + b * rf[i]).epsilon(1e-12));
    }

    DenseEmbedding bad{{0.0, 0.0}};
    CHECK_THROWS_AS(decode_dense(codec, bad), ValidationError);
}

TEST_CASE("codebook files round-trip and reject malformed input") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "latsep-codec-test";
    fs::create_directories(dir);
    const auto path = (dir / "codec.json").string();

    const auto codec = fit_codebook(random_corpus(6, 32, 41), 4, 4, 41);
    save_codebook(codec, path);
    CHECK(load_codebook(path) == codec);

    write_text_file("not json", path);
    CHECK_THROWS_AS(load_codebook(path), ModelError);
    write_text_file("{\"k\": 2, \"p\": 1, \"codes\": [[0.0], [0.0]]}", path);
    CHECK_THROWS_AS(load_codebook(path), ModelError);
    CHECK_THROWS_AS(load_codebook((dir / "missing.json").string()), ModelError);
    fs::remove_all(dir);
}
