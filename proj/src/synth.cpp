#include "modesel/synth.hpp"

#include <cmath>
#include <numeric>
#include <random>

namespace modesel {

Dataset gen_gaussian_mixture(const MixtureSpec& spec) {
    if (spec.classes < 2) throw Error("gen_gaussian_mixture: need at least 2 classes");
    if (spec.imbalance < 1.0) throw Error("gen_gaussian_mixture: imbalance ratio must be >= 1");
    const auto C = static_cast<std::size_t>(spec.classes);
    if (spec.n < C) throw Error("gen_gaussian_mixture: need at least one sample per class");

    // geometric size profile scaled to n via largest remainder
    std::vector<double> shares(C);
    for (std::size_t c = 0; c < C; ++c) {
        const double t = C > 1 ? static_cast<double>(c) / static_cast<double>(C - 1) : 0.0;
        shares[c] = std::pow(spec.imbalance, -t);
    }
    const double total = std::accumulate(shares.begin(), shares.end(), 0.0);
    std::vector<std::size_t> sizes(C, 1);
    std::size_t assigned = C;
    std::vector<double> frac(C);
    for (std::size_t c = 0; c < C; ++c) {
        const double quota = shares[c] / total * static_cast<double>(spec.n);
        const auto whole = static_cast<std::size_t>(std::floor(quota));
        if (whole > 1) {
            sizes[c] = whole;
            assigned += whole - 1;
        }
        frac[c] = quota - std::floor(quota);
    }
    for (std::size_t c = 0; assigned < spec.n; c = (c + 1) % C) {
        std::size_t pick = 0;
        double best = -1.0;
        for (std::size_t j = 0; j < C; ++j)
            if (frac[j] > best) {
                best = frac[j];
                pick = j;
            }
        frac[pick] = -2.0;
        ++sizes[pick];
        ++assigned;
        if (best < -1.5) break;
    }
    while (assigned > spec.n) {  // rounding overshoot: trim the largest class
        auto it = std::max_element(sizes.begin(), sizes.end());
        --*it;
        --assigned;
    }

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<std::vector<double>> means(C, std::vector<double>(spec.dim));
    for (auto& mean : means) {
        double norm = 0.0;
        for (double& v : mean) {
            v = gauss(rng);
            norm += v * v;
        }
        norm = std::sqrt(norm);
        if (norm < 1e-12) norm = 1.0;
        for (double& v : mean) v = v / norm * spec.separation;
    }

    Dataset ds;
    ds.n = spec.n;
    ds.d = spec.dim;
    ds.classes = spec.classes;
    ds.features.reserve(spec.n * spec.dim);
    ds.labels.reserve(spec.n);
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t i = 0; i < sizes[c]; ++i) {
            for (std::size_t j = 0; j < spec.dim; ++j)
                ds.features.push_back(means[c][j] + gauss(rng));
            ds.labels.push_back(static_cast<int>(c));
        }
    }
    ds.label_names.resize(C);
    for (std::size_t c = 0; c < C; ++c) ds.label_names[c] = std::to_string(c);
    ds.validate();
    return ds;
}

}  // namespace modesel
