#include "latsep/refine.hpp"

#include <cmath>

namespace latsep {

namespace {

double sum_sq(const Signal& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return s;
}

}  // namespace

std::pair<Signal, Signal> refine(const Signal& x1, const Signal& x2,
                                 const Signal& y, const Codebook& codec,
                                 const RefinementConfig& cfg) {
    if (x1.size() != x2.size() || x1.size() != y.size()) {
        throw ValidationError("refine: signal lengths differ");
    }
    if (x1.size() % static_cast<std::size_t>(codec.p) != 0) {
        throw ValidationError("refine: length not divisible by patch length");
    }
    if (!(cfg.alpha > 0.0) || !std::isfinite(cfg.alpha)) {
        throw ValidationError("refine: alpha must be positive and finite");
    }
    if (cfg.steps < 0) throw ValidationError("refine: steps must be >= 0");

    const std::size_t n = y.size();

    // The decoder is the identity on concatenated patches, so the dense
    // embeddings are just flat copies of the signals.
    Signal a = x1;
    Signal b = x2;

    Signal r(n);
    const auto residual_of = [&](const Signal& ea, const Signal& eb) {
        for (std::size_t i = 0; i < n; ++i) r[i] = ea[i] + eb[i] - 2.0 * y[i];
        return sum_sq(r);
    };

    double obj = residual_of(a, b);
    Signal best_a = a, best_b = b;
    double best_obj = obj;

    Signal trial_a(n), trial_b(n);
    for (int t = 0; t < cfg.steps; ++t) {
        // gradient of the squared objective w.r.t. each embedding is 2r
        Signal grad(n);
        for (std::size_t i = 0; i < n; ++i) grad[i] = a[i] + b[i] - 2.0 * y[i];
        for (double& g : grad) g *= 2.0;

        double step = cfg.alpha;
        double trial_obj = 0.0;
        int halvings = 0;
        for (;;) {
            for (std::size_t i = 0; i < n; ++i) {
                trial_a[i] = a[i] - step * grad[i];
                trial_b[i] = b[i] - step * grad[i];
            }
            trial_obj = residual_of(trial_a, trial_b);
            if (!cfg.use_backtracking || trial_obj <= obj || halvings >= 30) break;
            step *= 0.5;
            ++halvings;
        }
        if (cfg.use_backtracking && trial_obj > obj) break;  // 30 halvings exhausted

        const double improvement = std::sqrt(obj) - std::sqrt(trial_obj);
        a.swap(trial_a);
        b.swap(trial_b);
        obj = trial_obj;
        if (obj < best_obj) {
            best_obj = obj;
            best_a = a;
            best_b = b;
        }
        if (cfg.tolerance > 0.0 && improvement < cfg.tolerance) break;
    }

    return {std::move(best_a), std::move(best_b)};
}

}  // namespace latsep
