#include "latsep/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "latsep/rng.hpp"

namespace latsep {

namespace {

double clip_unit(double v) { return std::clamp(v, -1.0, 1.0); }

void check_spec(const SourceSpec& spec) {
    if (spec.values.empty()) {
        throw ValidationError("generate_signal: empty level/frequency set");
    }
    for (double v : spec.values) {
        if (!std::isfinite(v)) throw ValidationError("generate_signal: non-finite parameter");
    }
    if (!std::isfinite(spec.amplitude)) {
        throw ValidationError("generate_signal: non-finite amplitude");
    }
    if (spec.kind == GeneratorKind::markov_levels &&
        (!(spec.persistence >= 0.0) || spec.persistence > 1.0)) {
        throw ValidationError("generate_signal: persistence must lie in [0, 1]");
    }
}

// Draw order per signal, fixed for external reproduction:
//   markov_levels: one engine draw for the initial level, then per sample
//     (after the first) one uniform; a switch costs one extra engine draw.
//   tone_bank: per tone, one engine draw for the frequency and one uniform
//     for the phase; two tones per signal.
Signal markov_levels_signal(const SourceSpec& spec, int n, std::mt19937_64& rng) {
    const std::size_t levels = spec.values.size();
    std::size_t state = rng() % levels;
    Signal x(n);
    for (int i = 0; i < n; ++i) {
        if (i > 0 && uniform_unit(rng) >= spec.persistence) {
            state = rng() % levels;
        }
        x[i] = clip_unit(spec.values[state] * spec.amplitude);
    }
    return x;
}

Signal tone_bank_signal(const SourceSpec& spec, int n, std::mt19937_64& rng) {
    constexpr int tones = 2;
    double freq[tones];
    double phase[tones];
    for (int t = 0; t < tones; ++t) {
        freq[t] = spec.values[rng() % spec.values.size()];
        phase[t] = uniform_unit(rng) * 2.0 * std::numbers::pi;
    }
    Signal x(n);
    for (int i = 0; i < n; ++i) {
        double v = 0.0;
        for (int t = 0; t < tones; ++t) {
            v += std::sin(2.0 * std::numbers::pi * freq[t] * i / n + phase[t]);
        }
        x[i] = clip_unit(spec.amplitude * v / tones);
    }
    return x;
}

}  // namespace

Signal generate_signal(const SourceSpec& spec, int n, std::uint64_t engine_seed) {
    if (n < 1) throw ValidationError("generate_signal: length must be positive");
    check_spec(spec);
    std::mt19937_64 rng(engine_seed);
    switch (spec.kind) {
        case GeneratorKind::markov_levels: return markov_levels_signal(spec, n, rng);
        case GeneratorKind::tone_bank: return tone_bank_signal(spec, n, rng);
    }
    throw ValidationError("generate_signal: unknown generator kind");
}

PairedDataset generate_dataset(const SourceSpec& spec1, const SourceSpec& spec2,
                               int count, int n, std::uint64_t seed) {
    if (count < 0) throw ValidationError("generate_dataset: negative count");
    PairedDataset ds;
    ds.class1 = spec1.class_name;
    ds.class2 = spec2.class_name;
    ds.first.reserve(count);
    ds.second.reserve(count);
    for (int i = 0; i < count; ++i) {
        const std::uint64_t base1 = derive_seed(seed, spec1.seed);
        const std::uint64_t base2 = derive_seed(seed, spec2.seed);
        ds.first.push_back(generate_signal(spec1, n, derive_seed(base1, 2 * i)));
        ds.second.push_back(generate_signal(spec2, n, derive_seed(base2, 2 * i + 1)));
    }
    return ds;
}

Signal mix(const Signal& x1, const Signal& x2) {
    if (x1.size() != x2.size()) {
        throw ValidationError("mix: signal lengths differ (" +
                              std::to_string(x1.size()) + " vs " +
                              std::to_string(x2.size()) + ")");
    }
    Signal y(x1.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = 0.5 * (x1[i] + x2[i]);
    return y;
}

}  // namespace latsep
