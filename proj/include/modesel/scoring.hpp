#ifndef MODESEL_SCORING_HPP
#define MODESEL_SCORING_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "modesel/dataset.hpp"
#include "modesel/probe.hpp"

namespace modesel {

enum class StrategyId { Uncertainty = 0, Diversity = 1, ClassBalance = 2, Boundary = 3 };
inline constexpr std::size_t kStrategyCount = 4;
inline constexpr std::array<const char*, kStrategyCount> kStrategyNames = {
    "uncertainty", "diversity", "class_balance", "boundary"};

inline constexpr double kNoCoresetDistance = std::numeric_limits<double>::infinity();

/// Per-sample raw and normalized strategy scores plus the caches that make
/// selective recomputation possible: entropy/margin keyed by model version,
/// nearest-coreset distances updated per added batch, running class counts.
struct ScoreTable {
    std::size_t n = 0;
    int classes = 0;
    std::vector<double> raw;         // n x 4, strategy order U,D,C,B
    std::vector<double> normalized;  // n x 4, in [0,1] over the scored pool
    std::vector<double> min_dist;    // n, +inf while the coreset is empty
    std::vector<double> class_counts;  // per-class counts over the coreset
    double smoothing = 1.0;
    int model_version = -1;   // version the U/B columns were computed with
    std::size_t coreset_size = 0;

    // instrumentation
    std::uint64_t model_score_evals = 0;
    std::uint64_t model_score_cache_hits = 0;
    std::uint64_t distance_evals = 0;

    double& raw_at(std::size_t i, StrategyId s) {
        return raw[i * kStrategyCount + static_cast<std::size_t>(s)];
    }
    double raw_at(std::size_t i, StrategyId s) const {
        return raw[i * kStrategyCount + static_cast<std::size_t>(s)];
    }
    double& norm_at(std::size_t i, StrategyId s) {
        return normalized[i * kStrategyCount + static_cast<std::size_t>(s)];
    }
    double norm_at(std::size_t i, StrategyId s) const {
        return normalized[i * kStrategyCount + static_cast<std::size_t>(s)];
    }
};

ScoreTable make_score_table(std::size_t n, int classes, double smoothing = 1.0);

/// Natural-log prediction entropy; zero probabilities contribute nothing.
double score_uncertainty(std::span<const double> probs);

/// One minus the gap between the two largest probabilities.
double score_boundary(std::span<const double> probs);

/// Inverse smoothed frequency of `label` in the current coreset counts.
double score_class_balance(int label, std::span<const double> coreset_counts, double smoothing);

/// Cached nearest-coreset distance for sample i (infinite while the coreset
/// is empty). x_embed must be the embedding the cache was built from.
double score_diversity(std::span<const double> x_embed, const ScoreTable& table, std::size_t i);

/// Min-max scaling to [0,1]; a constant column maps to all 0.5.
std::vector<double> normalize_column(std::span<const double> raw);

/// Dot product of normalized scores with simplex weights.
double combined_score(std::span<const double> normalized, std::span<const double> weights);

/// Recompute the model-dependent U/B columns for `pool` iff the model version
/// moved (or force). No-op cache hits are counted.
void refresh_model_scores(ScoreTable& table, const ProbeModel& model, const Dataset& ds,
                          IndexSpan pool, bool force = false);

/// Selective diversity update: fold a freshly committed batch into min_dist,
/// touching only pool x batch pairs. embeds is the full n x k embedding matrix.
void update_diversity_cache(ScoreTable& table, const double* embeds, std::size_t k,
                            IndexSpan pool, IndexSpan batch);

/// Naive reference: recompute min_dist over the whole coreset. Used by the
/// cache-off path and as the equivalence oracle.
void recompute_diversity_full(ScoreTable& table, const double* embeds, std::size_t k,
                              IndexSpan pool, IndexSpan coreset);

void update_class_counts(ScoreTable& table, std::span<const int> batch_labels);

/// Fill raw D/C columns from the caches and normalize all four columns over
/// `pool`. An empty coreset normalizes every diversity score to 1.
void finalize_pool_scores(ScoreTable& table, const Dataset& ds, IndexSpan pool);

}  // namespace modesel

#endif
