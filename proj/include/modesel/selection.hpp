#ifndef MODESEL_SELECTION_HPP
#define MODESEL_SELECTION_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "modesel/controller.hpp"
#include "modesel/dataset.hpp"
#include "modesel/probe.hpp"
#include "modesel/scoring.hpp"

namespace modesel {

enum class Method { Mode, ModeStreaming, Random, Uncertainty, KCenter };

Method method_from_string(const std::string& name);
const char* method_name(Method m);

struct RunConfig {
    double budget = 0.3;           // <= 1: fraction of the pool, otherwise absolute
    double init_fraction = 0.10;   // of the budget, stratified warm start
    double round_fraction = 0.10;  // of the remaining budget per round, min 1
    int probe_epochs = 20;
    double probe_lr = 0.01;
    int probe_batch = 32;
    bool probe_cold_start = false;
    ControllerConfig controller;
    int strategy_eval_k = 25;
    int strategy_eval_epochs = 3;
    std::uint64_t seed = 0;
    bool caching = true;
    bool dump_scores = false;
    std::string dump_dir;
    std::size_t projection_dim = 32;  // PCA embeddings when d exceeds this
    double smoothing = 1.0;
    double stream_epsilon = 0.05;
};

std::size_t resolve_budget(const RunConfig& cfg, std::size_t pool_size);

struct RoundLog {
    int round = 0;
    std::size_t coreset_size = 0;
    double temperature = 0.0;
    Weights weights{};
    Weights rewards{};
    Weights gains{};
    Weights flagged_fraction{};
    double p_base = 0.0;
    double val_accuracy = 0.0;
    std::uint64_t model_score_evals = 0;
    std::uint64_t model_score_cache_hits = 0;
    std::uint64_t distance_evals = 0;
    double wall_ms = 0.0;
};

struct SelectionRun {
    Method method = Method::Mode;
    IndexVec selected;               // commit order, init batch first
    std::vector<int> selected_round; // round each sample was committed (0 = init)
    std::vector<RoundLog> rounds;
    double final_val_accuracy = 0.0;
    double final_test_accuracy = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t total_distance_evals = 0;
    std::uint64_t total_model_score_evals = 0;
    std::uint64_t total_model_score_cache_hits = 0;
    std::size_t embedding_dim = 0;
};

/// Indices of the k largest scores; equal scores favor the lower sample id.
IndexVec select_topk(std::span<const double> scores, IndexSpan ids, std::size_t k);

/// Linear-interpolation percentile of `values` (pct in [0,100]).
double percentile_linear(std::vector<double> values, double pct);

struct AgreementThresholds {
    Weights delta{};  // per-strategy 75th percentile of normalized scores
};

AgreementThresholds agreement_thresholds(const ScoreTable& table, IndexSpan pool);

/// Validation gain of briefly fine-tuning a cloned model on the coreset plus
/// the strategy's current top-k candidates. Nothing is committed.
double evaluate_strategy_gain(StrategyId strategy, const Dataset& ds, const ScoreTable& table,
                              IndexSpan coreset, IndexSpan pool, IndexSpan val,
                              const ProbeModel& model, double p_base, int eval_epochs,
                              int eval_k, double lr, int batch, std::uint64_t seed);

/// Farthest-point picks: repeatedly take the pool sample with the largest
/// distance to the selected set. min_dist tracks distances to `selected` and
/// is updated in place.
IndexVec kcenter_next(const double* embeds, std::size_t k, IndexSpan pool, std::size_t count,
                      std::vector<double>& min_dist);

SelectionRun run_mode(const RunConfig& cfg, const Dataset& ds, const SplitSpec& split,
                      IndexSpan test = {});
SelectionRun run_streaming(const RunConfig& cfg, const Weights& fixed_weights, const Dataset& ds,
                           const SplitSpec& split, IndexSpan test = {});
SelectionRun baseline_random(const RunConfig& cfg, const Dataset& ds, const SplitSpec& split,
                             IndexSpan test = {});
SelectionRun baseline_uncertainty(const RunConfig& cfg, const Dataset& ds, const SplitSpec& split,
                                  IndexSpan test = {});
SelectionRun baseline_kcenter(const RunConfig& cfg, const Dataset& ds, const SplitSpec& split,
                              IndexSpan test = {});

SelectionRun run_method(Method method, const RunConfig& cfg, const Dataset& ds,
                        const SplitSpec& split, IndexSpan test = {});

/// Per-class recall of the trained probe over `idx`.
std::vector<double> class_recall(const ProbeModel& model, const Dataset& ds, IndexSpan idx);

}  // namespace modesel

#endif
