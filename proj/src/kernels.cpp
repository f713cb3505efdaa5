#include "modesel/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace modesel::kernels {

namespace {

// Entropy and margin of softmax((W x + b) / T) for one sample.
inline void one_sample_scores(const double* weights, const double* bias, std::size_t classes,
                              std::size_t dim, double temperature, const double* x,
                              double* out_entropy, double* out_margin) {
    double logits[64];
    std::vector<double> big;
    double* l = logits;
    if (classes > 64) {
        big.resize(classes);
        l = big.data();
    }
    for (std::size_t c = 0; c < classes; ++c) {
        double acc = bias[c];
        const double* w = weights + c * dim;
        for (std::size_t j = 0; j < dim; ++j) acc += w[j] * x[j];
        l[c] = acc / temperature;
    }
    double m = l[0];
    for (std::size_t c = 1; c < classes; ++c) m = std::max(m, l[c]);
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
        l[c] = std::exp(l[c] - m);
        z += l[c];
    }
    double entropy = 0.0;
    double p1 = 0.0, p2 = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
        const double p = l[c] / z;
        if (p > 0.0) entropy -= p * std::log(p);
        if (p > p1) {
            p2 = p1;
            p1 = p;
        } else if (p > p2) {
            p2 = p;
        }
    }
    *out_entropy = entropy;
    *out_margin = 1.0 - (p1 - p2);
}

}  // namespace

void model_scores_serial(const double* weights, const double* bias, std::size_t classes,
                         std::size_t dim, double temperature, const double* features,
                         IndexSpan ids, double* out_entropy, double* out_margin) {
    for (std::size_t r = 0; r < ids.size(); ++r)
        one_sample_scores(weights, bias, classes, dim, temperature, features + ids[r] * dim,
                          &out_entropy[r], &out_margin[r]);
}

void model_scores_parallel(const double* weights, const double* bias, std::size_t classes,
                           std::size_t dim, double temperature, const double* features,
                           IndexSpan ids, double* out_entropy, double* out_margin) {
    const auto m = static_cast<std::ptrdiff_t>(ids.size());
#pragma omp parallel for schedule(static) num_threads(scoring_threads())
    for (std::ptrdiff_t r = 0; r < m; ++r)
        one_sample_scores(weights, bias, classes, dim, temperature,
                          features + ids[static_cast<std::size_t>(r)] * dim,
                          &out_entropy[r], &out_margin[r]);
}

void model_scores(const double* weights, const double* bias, std::size_t classes,
                  std::size_t dim, double temperature, const double* features, IndexSpan ids,
                  double* out_entropy, double* out_margin) {
    if (scoring_threads() > 1 && ids.size() >= 256)
        model_scores_parallel(weights, bias, classes, dim, temperature, features, ids,
                              out_entropy, out_margin);
    else
        model_scores_serial(weights, bias, classes, dim, temperature, features, ids,
                            out_entropy, out_margin);
}

double squared_distance(const double* a, const double* b, std::size_t k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const double diff = a[j] - b[j];
        acc += diff * diff;
    }
    return acc;
}

namespace {

inline void one_min_dist(const double* embeds, std::size_t k, std::size_t i, IndexSpan batch,
                         double* min_dist) {
    const double* xi = embeds + i * k;
    double best = min_dist[i];
    for (std::size_t b : batch) {
        const double dist = std::sqrt(squared_distance(xi, embeds + b * k, k));
        best = std::min(best, dist);
    }
    min_dist[i] = best;
}

}  // namespace

std::uint64_t min_dist_update_serial(const double* embeds, std::size_t k, IndexSpan pool,
                                     IndexSpan batch, double* min_dist) {
    for (std::size_t i : pool) one_min_dist(embeds, k, i, batch, min_dist);
    return static_cast<std::uint64_t>(pool.size()) * batch.size();
}

std::uint64_t min_dist_update_parallel(const double* embeds, std::size_t k, IndexSpan pool,
                                       IndexSpan batch, double* min_dist) {
    const auto m = static_cast<std::ptrdiff_t>(pool.size());
#pragma omp parallel for schedule(static) num_threads(scoring_threads())
    for (std::ptrdiff_t r = 0; r < m; ++r)
        one_min_dist(embeds, k, pool[static_cast<std::size_t>(r)], batch, min_dist);
    return static_cast<std::uint64_t>(pool.size()) * batch.size();
}

std::uint64_t min_dist_update(const double* embeds, std::size_t k, IndexSpan pool,
                              IndexSpan batch, double* min_dist) {
    if (scoring_threads() > 1 && pool.size() * batch.size() >= 4096)
        return min_dist_update_parallel(embeds, k, pool, batch, min_dist);
    return min_dist_update_serial(embeds, k, pool, batch, min_dist);
}

}  // namespace modesel::kernels
