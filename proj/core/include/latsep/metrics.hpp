#pragma once

#include <utility>

#include "latsep/types.hpp"

namespace latsep {

// 10 * log10(peak^2 / MSE) in dB; +infinity when the signals match exactly.
double psnr(const Signal& est, const Signal& ref, double peak = 1.0);

// The no-op separation: both estimates equal the mixture itself (the mixture
// is already the average of the sources).
std::pair<Signal, Signal> average_baseline(const Signal& y);

double l2_distance(const Signal& a, const Signal& b);

}  // namespace latsep
