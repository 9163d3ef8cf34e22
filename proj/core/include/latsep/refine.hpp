#pragma once

#include <utility>

#include "latsep/codec.hpp"
#include "latsep/types.hpp"

namespace latsep {

struct RefinementConfig {
    int steps = 500;
    double alpha = 0.1;
    bool use_backtracking = false;  // halve the step until no increase
    double tolerance = 0.0;         // stop when residual improvement < tolerance
};

// Gradient descent on || D(e1) + D(e2) - 2y ||_2^2 over the dense patch
// embeddings of x1 and x2. The decoder is linear, so the gradient w.r.t.
// each embedding is 2r with r = D(e1) + D(e2) - 2y; both embeddings step
// simultaneously. Returns the decoded pair with the smallest residual seen,
// so the result never degrades the inputs.
std::pair<Signal, Signal> refine(const Signal& x1, const Signal& x2,
                                 const Signal& y, const Codebook& codec,
                                 const RefinementConfig& cfg);

}  // namespace latsep
