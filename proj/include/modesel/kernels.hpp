#ifndef MODESEL_KERNELS_HPP
#define MODESEL_KERNELS_HPP

#include <cstddef>
#include <cstdint>
#include <span>

#include "modesel/common.hpp"

// Data-parallel inner loops. Each kernel has a serial reference and an
// OpenMP variant; both compute identical results element by element (no
// cross-element reductions), so outputs are bit-equal at any thread count.
// The unsuffixed entry points dispatch on scoring_threads().

namespace modesel::kernels {

// Per-sample entropy and top-2 margin complement from a linear probe.
// weights: C x d row-major, bias: C, logits scaled by 1/temperature.
// Writes out_entropy[k], out_margin[k] for the k-th id in `ids`.
void model_scores_serial(const double* weights, const double* bias, std::size_t classes,
                         std::size_t dim, double temperature, const double* features,
                         IndexSpan ids, double* out_entropy, double* out_margin);
void model_scores_parallel(const double* weights, const double* bias, std::size_t classes,
                           std::size_t dim, double temperature, const double* features,
                           IndexSpan ids, double* out_entropy, double* out_margin);
void model_scores(const double* weights, const double* bias, std::size_t classes,
                  std::size_t dim, double temperature, const double* features,
                  IndexSpan ids, double* out_entropy, double* out_margin);

// min_dist[i] <- min(min_dist[i], min over batch of ||embed_i - embed_b||)
// for every i in pool. embeds: n x k row-major. Returns pair-distance count.
std::uint64_t min_dist_update_serial(const double* embeds, std::size_t k, IndexSpan pool,
                                     IndexSpan batch, double* min_dist);
std::uint64_t min_dist_update_parallel(const double* embeds, std::size_t k, IndexSpan pool,
                                       IndexSpan batch, double* min_dist);
std::uint64_t min_dist_update(const double* embeds, std::size_t k, IndexSpan pool,
                              IndexSpan batch, double* min_dist);

double squared_distance(const double* a, const double* b, std::size_t k);

}  // namespace modesel::kernels

#endif
