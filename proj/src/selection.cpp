#include "modesel/selection.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>

#include "modesel/kernels.hpp"
#include "modesel/streaming.hpp"

namespace modesel {

Method method_from_string(const std::string& name) {
    if (name == "mode") return Method::Mode;
    if (name == "mode-streaming") return Method::ModeStreaming;
    if (name == "random") return Method::Random;
    if (name == "uncertainty") return Method::Uncertainty;
    if (name == "kcenter") return Method::KCenter;
    throw ConfigError("unknown method '" + name + "'");
}

const char* method_name(Method m) {
    switch (m) {
        case Method::Mode: return "mode";
        case Method::ModeStreaming: return "mode-streaming";
        case Method::Random: return "random";
        case Method::Uncertainty: return "uncertainty";
        case Method::KCenter: return "kcenter";
    }
    return "?";
}

std::size_t resolve_budget(const RunConfig& cfg, std::size_t pool_size) {
    if (cfg.budget <= 0.0) throw ConfigError("budget must be positive");
    std::size_t b;
    if (cfg.budget <= 1.0)
        b = static_cast<std::size_t>(std::llround(cfg.budget * static_cast<double>(pool_size)));
    else
        b = static_cast<std::size_t>(std::llround(cfg.budget));
    if (b < 1) b = 1;
    if (b > pool_size)
        throw Error("budget " + std::to_string(b) + " exceeds pool size " +
                    std::to_string(pool_size));
    return b;
}

IndexVec select_topk(std::span<const double> scores, IndexSpan ids, std::size_t k) {
    if (scores.size() != ids.size()) throw Error("select_topk: score/id length mismatch");
    if (k > ids.size()) throw Error("select_topk: k exceeds candidate count");
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return ids[a] < ids[b];
    });
    IndexVec out(k);
    for (std::size_t r = 0; r < k; ++r) out[r] = ids[order[r]];
    std::sort(out.begin(), out.end());
    return out;
}

double percentile_linear(std::vector<double> values, double pct) {
    if (values.empty()) throw Error("percentile: empty input");
    std::sort(values.begin(), values.end());
    const double rank = pct / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = rank - std::floor(rank);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

AgreementThresholds agreement_thresholds(const ScoreTable& table, IndexSpan pool) {
    if (pool.size() < 4) throw Error("agreement_thresholds: pool too small");
    AgreementThresholds out;
    std::vector<double> column(pool.size());
    for (std::size_t s = 0; s < kStrategyCount; ++s) {
        for (std::size_t r = 0; r < pool.size(); ++r)
            column[r] = table.norm_at(pool[r], static_cast<StrategyId>(s));
        out.delta[s] = percentile_linear(column, 75.0);
    }
    return out;
}

double evaluate_strategy_gain(StrategyId strategy, const Dataset& ds, const ScoreTable& table,
                              IndexSpan coreset, IndexSpan pool, IndexSpan val,
                              const ProbeModel& model, double p_base, int eval_epochs,
                              int eval_k, double lr, int batch, std::uint64_t seed) {
    if (eval_epochs <= 0) return 0.0;
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max(eval_k, 1)),
                                                pool.size());
    std::vector<double> column(pool.size());
    for (std::size_t r = 0; r < pool.size(); ++r)
        column[r] = table.norm_at(pool[r], strategy);
    const IndexVec trial = select_topk(column, pool, k);

    IndexVec subset(coreset.begin(), coreset.end());
    subset.insert(subset.end(), trial.begin(), trial.end());

    ProbeModel clone = model;  // warm start from the round's parameters
    const auto report = train(clone, ds, subset, val, eval_epochs, lr, batch, seed);
    return report.final_val_accuracy - p_base;
}

IndexVec kcenter_next(const double* embeds, std::size_t k, IndexSpan pool, std::size_t count,
                      std::vector<double>& min_dist) {
    IndexVec avail(pool.begin(), pool.end());
    IndexVec picks;
    picks.reserve(count);
    for (std::size_t step = 0; step < count && !avail.empty(); ++step) {
        std::size_t best_pos = 0;
        double best = -1.0;
        for (std::size_t r = 0; r < avail.size(); ++r) {
            const double d = min_dist[avail[r]];
            if (d > best) {  // strict: ties keep the lowest id
                best = d;
                best_pos = r;
            }
        }
        const std::size_t pick = avail[best_pos];
        picks.push_back(pick);
        avail.erase(avail.begin() + static_cast<std::ptrdiff_t>(best_pos));
        const std::size_t batch[1] = {pick};
        kernels::min_dist_update_serial(embeds, k, avail, {batch, 1}, min_dist.data());
    }
    std::sort(picks.begin(), picks.end());
    return picks;
}

std::vector<double> class_recall(const ProbeModel& model, const Dataset& ds, IndexSpan idx) {
    std::vector<double> hit(static_cast<std::size_t>(ds.classes), 0.0);
    std::vector<double> total(static_cast<std::size_t>(ds.classes), 0.0);
    for (std::size_t i : idx) {
        const auto c = static_cast<std::size_t>(ds.labels[i]);
        total[c] += 1.0;
        if (predict_class(model, ds.row(i)) == ds.labels[i]) hit[c] += 1.0;
    }
    for (std::size_t c = 0; c < hit.size(); ++c)
        hit[c] = total[c] > 0.0 ? hit[c] / total[c] : 0.0;
    return hit;
}

namespace {

std::size_t predict_round_count(std::size_t remaining, double fraction) {
    std::size_t rounds = 0;
    while (remaining > 0) {
        auto k = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(remaining)));
        k = std::clamp<std::size_t>(k, 1, remaining);
        remaining -= k;
        ++rounds;
    }
    return rounds;
}

// Shared round skeleton: stratified warm start, probe training, per-round
// pick/commit/retrain, identical logging across methods.
struct RoundDriver {
    const RunConfig& cfg;
    const Dataset& ds;
    const SplitSpec& split;
    IndexSpan test;

    std::vector<double> embeds;  // n x embed_dim
    std::size_t embed_dim = 0;
    IndexVec coreset;
    IndexVec pool;
    ProbeModel model;
    std::size_t budget = 0;
    int completed_epochs = 0;
    int epoch_cap = 1;  // E_max
    SelectionRun run;

    RoundDriver(Method method, const RunConfig& c, const Dataset& d, const SplitSpec& s,
                IndexSpan t)
        : cfg(c), ds(d), split(s), test(t) {
        run.method = method;
    }

    void build_embeddings() {
        embed_dim = cfg.projection_dim > 0 && ds.d > cfg.projection_dim &&
                            split.pool.size() >= cfg.projection_dim
                        ? cfg.projection_dim
                        : ds.d;
        if (embed_dim == ds.d) {
            embeds = ds.features;
            return;
        }
        const Projection proj = fit_projection(ds, split.pool, embed_dim);
        embeds.resize(ds.n * embed_dim);
        for (std::size_t i = 0; i < ds.n; ++i) {
            const auto z = project(proj, ds.row(i));
            std::copy(z.begin(), z.end(), embeds.begin() + static_cast<std::ptrdiff_t>(i * embed_dim));
        }
    }

    void setup() {
        budget = resolve_budget(cfg, split.pool.size());
        build_embeddings();
        run.embedding_dim = embed_dim;

        auto init_count = static_cast<std::size_t>(
            std::llround(cfg.init_fraction * static_cast<double>(budget)));
        init_count = std::clamp<std::size_t>(init_count, 1, budget);

        coreset = stratified_sample(ds, split.pool, init_count, derive_seed(cfg.seed, "init"));
        pool.clear();
        std::set_difference(split.pool.begin(), split.pool.end(), coreset.begin(), coreset.end(),
                            std::back_inserter(pool));

        model = init_model(ds.d, static_cast<std::size_t>(ds.classes),
                           derive_seed(cfg.seed, "model"));
        train_probe(0);
        epoch_cap = cfg.probe_epochs *
                    static_cast<int>(1 + predict_round_count(budget - coreset.size(),
                                                             cfg.round_fraction));

        run.selected.assign(coreset.begin(), coreset.end());
        run.selected_round.assign(coreset.size(), 0);
    }

    void train_probe(int round) {
        if (cfg.probe_cold_start && round > 0)
            model = init_model(ds.d, static_cast<std::size_t>(ds.classes),
                               derive_seed(cfg.seed, "model"));
        try {
            train(model, ds, coreset, split.val, cfg.probe_epochs, cfg.probe_lr, cfg.probe_batch,
                  derive_seed(cfg.seed, "probe", static_cast<std::uint64_t>(round)));
        } catch (const Error& e) {
            throw Error("round " + std::to_string(round) + ": " + e.what());
        }
        completed_epochs += cfg.probe_epochs;
    }

    std::size_t next_round_size() const {
        const std::size_t remaining = budget - coreset.size();
        auto k = static_cast<std::size_t>(
            std::llround(cfg.round_fraction * static_cast<double>(remaining)));
        return std::clamp<std::size_t>(k, 1, remaining);
    }

    void commit(const IndexVec& batch, int round) {
        IndexVec merged;
        merged.reserve(coreset.size() + batch.size());
        std::merge(coreset.begin(), coreset.end(), batch.begin(), batch.end(),
                   std::back_inserter(merged));
        coreset = std::move(merged);
        IndexVec rest;
        rest.reserve(pool.size() - batch.size());
        std::set_difference(pool.begin(), pool.end(), batch.begin(), batch.end(),
                            std::back_inserter(rest));
        pool = std::move(rest);
        run.selected.insert(run.selected.end(), batch.begin(), batch.end());
        run.selected_round.insert(run.selected_round.end(), batch.size(), round);
    }

    // pick(round, k, log) chooses the batch; after_commit sees the committed
    // batch and the shrunk pool (cache maintenance lives there).
    void drive(const std::function<IndexVec(int, std::size_t, RoundLog&)>& pick,
               const std::function<void(const IndexVec&, IndexSpan, RoundLog&)>& after_commit =
                   {}) {
        int round = 0;
        while (coreset.size() < budget) {
            ++round;
            const auto t0 = std::chrono::steady_clock::now();
            RoundLog log;
            log.round = round;
            log.weights = {0.25, 0.25, 0.25, 0.25};

            const std::size_t k = next_round_size();
            IndexVec batch = pick(round, k, log);
            commit(batch, round);
            if (after_commit) after_commit(batch, pool, log);
            train_probe(round);

            log.coreset_size = coreset.size();
            log.val_accuracy = accuracy(model, ds, split.val);
            log.wall_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
            run.rounds.push_back(log);
        }
    }

    void finish() {
        run.final_val_accuracy = accuracy(model, ds, split.val);
        if (!test.empty()) run.final_test_accuracy = accuracy(model, ds, test);
    }
};

void dump_round_scores(const RunConfig& cfg, int round, const ScoreTable& table, IndexSpan pool,
                       const Weights& weights) {
    if (!cfg.dump_scores || cfg.dump_dir.empty()) return;
    std::ofstream out(cfg.dump_dir + "/scores_round_" + std::to_string(round) + ".csv");
    if (!out) return;
    out << "sample_id,s_u,s_d,s_c,s_b,s_u_norm,s_d_norm,s_c_norm,s_b_norm,combined\n";
    for (std::size_t i : pool) {
        out << i;
        for (std::size_t s = 0; s < kStrategyCount; ++s)
            out << "," << format_double(table.raw_at(i, static_cast<StrategyId>(s)));
        double combined = 0.0;
        for (std::size_t s = 0; s < kStrategyCount; ++s) {
            const double v = table.norm_at(i, static_cast<StrategyId>(s));
            out << "," << format_double(v);
            combined += weights[s] * v;
        }
        out << "," << format_double(combined) << "\n";
    }
}

}  // namespace

SelectionRun run_mode(const RunConfig& cfg, const Dataset& ds, const SplitSpec& split,
                      IndexSpan test) {
    RoundDriver driver(Method::Mode, cfg, ds, split, test);
    driver.setup();

    ScoreTable table = make_score_table(ds.n, ds.classes, cfg.smoothing);
    if (cfg.caching) {
        update_diversity_cache(table, driver.embeds.data(), driver.embed_dim, driver.pool,
                               driver.coreset);
        std::vector<int> init_labels;
        for (std::size_t i : driver.coreset) init_labels.push_back(ds.labels[i]);
        update_class_counts(table, init_labels);
    }

    ControllerState state;
    state.temperature = cfg.controller.tau0;
    WeightNet net;
    if (cfg.controller.use_weight_net)
        net = WeightNet::random(derive_seed(cfg.seed, "weightnet"));

    std::uint64_t distance_marker = 0;
    auto pick = [&](int round, std::size_t k, RoundLog& log) -> IndexVec {
        distance_marker = table.distance_evals;
        if (cfg.caching) {
            refresh_model_scores(table, driver.model, ds, driver.pool);
        } else {
            refresh_model_scores(table, driver.model, ds, driver.pool, /*force=*/true);
            recompute_diversity_full(table, driver.embeds.data(), driver.embed_dim, driver.pool,
                                     driver.coreset);
            table.class_counts = class_frequencies(ds, driver.coreset);
        }
        finalize_pool_scores(table, ds, driver.pool);

        if (driver.pool.size() >= 4) {  // percentile undefined on tiny pools
            const auto thresholds = agreement_thresholds(table, driver.pool);
            for (std::size_t s = 0; s < kStrategyCount; ++s) {
                std::size_t flagged = 0;
                for (std::size_t i : driver.pool)
                    if (table.norm_at(i, static_cast<StrategyId>(s)) > thresholds.delta[s])
                        ++flagged;
                log.flagged_fraction[s] =
                    static_cast<double>(flagged) / static_cast<double>(driver.pool.size());
            }
        }

        const double p_base = accuracy(driver.model, ds, split.val);
        log.p_base = p_base;
        // gains enter the controller in percentage points; at fraction scale
        // the (1 + gamma*r)/tau softmax is numb for any realistic tau.
        // one shared eval seed per round: common random numbers keep the
        // four fine-tunes paired, so gain differences reflect the subsets
        const std::uint64_t eval_seed =
            derive_seed(cfg.seed, "eval", static_cast<std::uint64_t>(round));
        Weights gains{};
        for (std::size_t s = 0; s < kStrategyCount; ++s) {
            gains[s] = 100.0 * evaluate_strategy_gain(static_cast<StrategyId>(s), ds, table,
                                                      driver.coreset, driver.pool, split.val,
                                                      driver.model, p_base,
                                                      cfg.strategy_eval_epochs,
                                                      cfg.strategy_eval_k, cfg.probe_lr,
                                                      cfg.probe_batch, eval_seed);
        }
        log.gains = gains;

        state.budget_remaining = static_cast<double>(driver.budget - driver.coreset.size()) /
                                 static_cast<double>(driver.budget);
        state.epoch_progress = std::min(
            1.0, static_cast<double>(driver.completed_epochs) / static_cast<double>(driver.epoch_cap));
        state.val_accuracy = p_base;
        state.grad_norm = normalize_grad(state, grad_magnitude(driver.model, ds, driver.coreset));
        state = round_update(state, cfg.controller, gains,
                             cfg.controller.use_weight_net ? &net : nullptr);

        log.temperature = state.temperature;
        log.weights = state.weights;
        log.rewards = state.last_rewards;

        std::vector<double> combined(driver.pool.size());
        for (std::size_t r = 0; r < driver.pool.size(); ++r) {
            const std::size_t i = driver.pool[r];
            double acc = 0.0;
            for (std::size_t s = 0; s < kStrategyCount; ++s)
                acc += state.weights[s] * table.norm_at(i, static_cast<StrategyId>(s));
            combined[r] = acc;
        }
        dump_round_scores(cfg, round, table, driver.pool, state.weights);

        log.model_score_evals = table.model_score_evals;
        log.model_score_cache_hits = table.model_score_cache_hits;
        return select_topk(combined, driver.pool, k);
    };

    auto after_commit = [&](const IndexVec& batch, IndexSpan pool_after, RoundLog& log) {
        if (cfg.caching) {
            update_diversity_cache(table, driver.embeds.data(), driver.embed_dim, pool_after,
                                   batch);
            std::vector<int> labels;
            labels.reserve(batch.size());
            for (std::size_t i : batch) labels.push_back(ds.labels[i]);
            update_class_counts(table, labels);
        }
        log.distance_evals = table.distance_evals - distance_marker;
    };

    driver.drive(pick, after_commit);
    driver.run.total_distance_evals = table.distance_evals;
    driver.run.total_model_score_evals = table.model_score_evals;
    driver.run.total_model_score_cache_hits = table.model_score_cache_hits;
    driver.finish();
    return driver.run;
}

SelectionRun baseline_random(const RunConfig& cfg, const Dataset& ds, const SplitSpec& split,
                             IndexSpan test) {
    RoundDriver driver(Method::Random, cfg, ds, split, test);
    driver.setup();
    auto pick = [&](int round, std::size_t k, RoundLog&) -> IndexVec {
        IndexVec shuffled(driver.pool.begin(), driver.pool.end());
        std::mt19937_64 rng(derive_seed(cfg.seed, "pick", static_cast<std::uint64_t>(round)));
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        shuffled.resize(k);
        std::sort(shuffled.begin(), shuffled.end());
        return shuffled;
    };
    driver.drive(pick);
    driver.finish();
    return driver.run;
}

SelectionRun baseline_uncertainty(const RunConfig& cfg, const Dataset& ds, const SplitSpec& split,
                                  IndexSpan test) {
    RoundDriver driver(Method::Uncertainty, cfg, ds, split, test);
    driver.setup();
    auto pick = [&](int, std::size_t k, RoundLog&) -> IndexVec {
        std::vector<double> entropy(driver.pool.size()), margin(driver.pool.size());
        kernels::model_scores(driver.model.weights.data(), driver.model.bias.data(),
                              driver.model.classes, driver.model.dim,
                              driver.model.temperature_scale, ds.features.data(), driver.pool,
                              entropy.data(), margin.data());
        return select_topk(entropy, driver.pool, k);
    };
    driver.drive(pick);
    driver.finish();
    return driver.run;
}

SelectionRun baseline_kcenter(const RunConfig& cfg, const Dataset& ds, const SplitSpec& split,
                              IndexSpan test) {
    RoundDriver driver(Method::KCenter, cfg, ds, split, test);
    driver.setup();
    std::vector<double> min_dist(ds.n, kNoCoresetDistance);
    kernels::min_dist_update(driver.embeds.data(), driver.embed_dim, driver.pool, driver.coreset,
                             min_dist.data());
    auto pick = [&](int, std::size_t k, RoundLog&) -> IndexVec {
        return kcenter_next(driver.embeds.data(), driver.embed_dim, driver.pool, k, min_dist);
    };
    driver.drive(pick);
    driver.finish();
    return driver.run;
}

SelectionRun run_streaming(const RunConfig& cfg, const Weights& fixed_weights, const Dataset& ds,
                           const SplitSpec& split, IndexSpan test) {
    double wsum = 0.0;
    for (double w : fixed_weights) {
        if (w < 0.0) throw Error("run_streaming: weights must be nonnegative");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9) throw Error("run_streaming: weights must sum to 1");

    RoundDriver driver(Method::ModeStreaming, cfg, ds, split, test);
    driver.budget = resolve_budget(cfg, split.pool.size());
    driver.build_embeddings();
    driver.run.embedding_dim = driver.embed_dim;

    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t p = split.pool.size();

    // untrained probe: the pass is model-free, scores come from priors
    ProbeModel probe = init_model(ds.d, static_cast<std::size_t>(ds.classes),
                                  derive_seed(cfg.seed, "model"));
    std::vector<double> entropy(p), margin(p);
    kernels::model_scores(probe.weights.data(), probe.bias.data(), probe.classes, probe.dim,
                          probe.temperature_scale, ds.features.data(), split.pool, entropy.data(),
                          margin.data());
    const double max_entropy = std::log(static_cast<double>(ds.classes));
    std::vector<double> modular(p);
    const double w_u = fixed_weights[static_cast<std::size_t>(StrategyId::Uncertainty)];
    const double w_d = fixed_weights[static_cast<std::size_t>(StrategyId::Diversity)];
    const double w_c = fixed_weights[static_cast<std::size_t>(StrategyId::ClassBalance)];
    const double w_b = fixed_weights[static_cast<std::size_t>(StrategyId::Boundary)];
    for (std::size_t r = 0; r < p; ++r)
        modular[r] = w_u * entropy[r] / max_entropy + w_b * margin[r];

    // pool-local facility location over the embeddings
    std::vector<double> points(p * driver.embed_dim);
    std::vector<int> labels(p);
    for (std::size_t r = 0; r < p; ++r) {
        const std::size_t i = split.pool[r];
        std::copy_n(driver.embeds.begin() + static_cast<std::ptrdiff_t>(i * driver.embed_dim),
                    driver.embed_dim,
                    points.begin() + static_cast<std::ptrdiff_t>(r * driver.embed_dim));
        labels[r] = ds.labels[i];
    }
    const auto fl = verify::make_facility_location(points, p, driver.embed_dim);
    stream::WeightedCoverageObjective objective(fl, modular, labels, ds.classes, cfg.smoothing,
                                                1.0, w_c, w_d);
    IndexVec order(p);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto sieve =
        stream::sieve_stream_maximize(objective, order, driver.budget, cfg.stream_epsilon);

    driver.run.selected.reserve(sieve.selected.size());
    for (std::size_t r : sieve.selected) driver.run.selected.push_back(split.pool[r]);
    driver.run.selected_round.assign(driver.run.selected.size(), 1);
    driver.coreset.assign(driver.run.selected.begin(), driver.run.selected.end());
    std::sort(driver.coreset.begin(), driver.coreset.end());

    driver.model = probe;
    train(driver.model, ds, driver.coreset, split.val, cfg.probe_epochs, cfg.probe_lr,
          cfg.probe_batch, derive_seed(cfg.seed, "probe", 1));

    RoundLog log;
    log.round = 1;
    log.coreset_size = driver.coreset.size();
    log.temperature = cfg.controller.tau0;
    log.weights = fixed_weights;
    log.val_accuracy = accuracy(driver.model, ds, split.val);
    log.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    driver.run.rounds.push_back(log);
    driver.finish();
    return driver.run;
}

SelectionRun run_method(Method method, const RunConfig& cfg, const Dataset& ds,
                        const SplitSpec& split, IndexSpan test) {
    switch (method) {
        case Method::Mode: return run_mode(cfg, ds, split, test);
        case Method::ModeStreaming:
            return run_streaming(cfg, {0.25, 0.25, 0.25, 0.25}, ds, split, test);
        case Method::Random: return baseline_random(cfg, ds, split, test);
        case Method::Uncertainty: return baseline_uncertainty(cfg, ds, split, test);
        case Method::KCenter: return baseline_kcenter(cfg, ds, split, test);
    }
    throw Error("run_method: unhandled method");
}

}  // namespace modesel
