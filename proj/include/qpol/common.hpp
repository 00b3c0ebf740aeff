#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace qpol {

// Error taxonomy used across modules. The CLI maps these onto exit codes:
// ConfigError -> 1, check failures -> 2, NumericalError -> 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IndexError : std::out_of_range {
    using std::out_of_range::out_of_range;
};
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};
struct ProtocolError : std::logic_error {
    using std::logic_error::logic_error;
};
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Raw born-rule policies cannot divide by a vanishing projector probability.
struct DegenerateGradientError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// PQC environment generator failed to produce a margin-respecting dataset.
struct DegenerateGeneratorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Brute-force oracles refuse inputs beyond desk scale.
struct OracleRefusedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

// splitmix64; used to derive independent per-episode/per-candidate streams
// so results do not depend on worker scheduling.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    return Rng(mix_seed(seed, stream));
}

}  // namespace qpol
