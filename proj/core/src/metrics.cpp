#include "latsep/metrics.hpp"

#include <cmath>
#include <limits>

namespace latsep {

double psnr(const Signal& est, const Signal& ref, double peak) {
    if (est.size() != ref.size()) {
        throw ValidationError("psnr: signal lengths differ");
    }
    if (est.empty()) throw ValidationError("psnr: empty signals");
    double mse = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        const double d = est[i] - ref[i];
        mse += d * d;
    }
    mse /= static_cast<double>(est.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

std::pair<Signal, Signal> average_baseline(const Signal& y) {
    return {y, y};
}

double l2_distance(const Signal& a, const Signal& b) {
    if (a.size() != b.size()) throw ValidationError("l2_distance: lengths differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace latsep
