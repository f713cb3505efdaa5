#ifndef MODESEL_COMMON_HPP
#define MODESEL_COMMON_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace modesel {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised for malformed input data (files, labels, shapes).
struct DataError : Error {
    using Error::Error;
};

/// Raised for unusable configuration (files, keys, ranges).
struct ConfigError : Error {
    using Error::Error;
};

using IndexSpan = std::span<const std::size_t>;
using IndexVec = std::vector<std::size_t>;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

// Every sub-computation (split, init, probe, controller, eval) draws from its
// own stream derived from the root seed, so each stage is independently
// reproducible. derive_seed(root, purpose, k) gives the k-th stream of a
// purpose family.
std::uint64_t derive_seed(std::uint64_t root, std::string_view purpose);
std::uint64_t derive_seed(std::uint64_t root, std::string_view purpose, std::uint64_t index);

// Thread cap for the data-parallel kernels. Honors MODESEL_THREADS when set;
// otherwise the OpenMP default. Always 1 without OpenMP.
int scoring_threads();

std::string format_double(double v);  // shortest round-trippable decimal

}  // namespace modesel

#endif
