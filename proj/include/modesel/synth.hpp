#ifndef MODESEL_SYNTH_HPP
#define MODESEL_SYNTH_HPP

#include <cstdint>

#include "modesel/dataset.hpp"

namespace modesel {

/// Gaussian mixture with class means drawn uniformly on a sphere of radius
/// `separation` and unit isotropic noise. `imbalance` is the largest/smallest
/// class size ratio (sizes interpolate geometrically, largest-remainder fit).
struct MixtureSpec {
    int classes = 10;
    std::size_t n = 2000;
    std::size_t dim = 16;
    double separation = 3.0;
    double imbalance = 1.0;
    std::uint64_t seed = 0;
};

Dataset gen_gaussian_mixture(const MixtureSpec& spec);

}  // namespace modesel

#endif
