#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace latsep {

using Token = std::int32_t;
using Signal = std::vector<double>;   // samples, nominally in [-1, 1]
using TokenSeq = std::vector<Token>;  // codebook indices in [0, K)

// Invalid arguments or inputs violating an operation precondition.
// Mapped to CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Missing, malformed or mutually inconsistent model/data files.
// Mapped to CLI exit code 2.
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

void check_finite(const Signal& x, const std::string& what);
void check_tokens(const TokenSeq& z, int k, const std::string& what);

}  // namespace latsep
