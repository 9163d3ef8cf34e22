#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "latsep/types.hpp"

namespace latsep {

enum class GeneratorKind { markov_levels, tone_bank };

// Description of one synthetic source class.
//   markov_levels: per-sample Markov chain over `values` (a level set);
//                  stays on the current level with probability `persistence`,
//                  otherwise redraws a level uniformly.
//   tone_bank:     sum of two sinusoids with frequencies drawn from `values`
//                  (cycles per signal) and uniform random phases.
// Samples are scaled by `amplitude` and clipped to [-1, 1].
struct SourceSpec {
    std::string class_name;
    GeneratorKind kind = GeneratorKind::markov_levels;
    std::vector<double> values;  // level set or frequency set
    double persistence = 0.9;    // markov_levels only
    double amplitude = 1.0;
    std::uint64_t seed = 0;
};

// One signal from the spec's generator, driven by an explicit engine seed.
// Draw order is fixed and documented in the implementation so the stream
// can be reproduced independently.
Signal generate_signal(const SourceSpec& spec, int n, std::uint64_t engine_seed);

struct PairedDataset {
    std::vector<Signal> first;
    std::vector<Signal> second;
    std::string class1;
    std::string class2;
};

// `count` pairs of length-n signals. Signal j of pair i uses engine seed
// derive_seed(derive_seed(seed, spec.seed), 2*i + j), so datasets are a pure
// function of (specs, count, n, seed).
PairedDataset generate_dataset(const SourceSpec& spec1, const SourceSpec& spec2,
                               int count, int n, std::uint64_t seed);

// Element-wise average (x1 + x2) / 2.
Signal mix(const Signal& x1, const Signal& x2);

}  // namespace latsep
