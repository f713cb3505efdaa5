// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Every tolerance is pinned here, not tuned at runtime.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "modesel/controller.hpp"
#include "modesel/selection.hpp"
#include "modesel/streaming.hpp"
#include "modesel/synth.hpp"
#include "modesel/verify.hpp"

using namespace modesel;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int number, const std::string& name, const Outcome& outcome, double seconds) {
    std::printf("[%s] criterion %d (%s): %s (%.1fs)\n", outcome.pass ? "PASS" : "FAIL", number,
                name.c_str(), outcome.detail.c_str(), seconds);
    if (!outcome.pass) ++failures;
}

template <typename F>
void run(int number, const std::string& name, F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
        outcome = fn();
    } catch (const std::exception& e) {
        outcome.pass = false;
        outcome.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(number, name, outcome, secs);
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

// ---- criterion 1: greedy vs brute force on random coverage instances ----

Outcome greedy_approximation() {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> size_dist(8, 14);
    double ratio_sum = 0.0;
    double worst = 1.0;
    const int instances = 200;
    for (int i = 0; i < instances; ++i) {
        const std::size_t n = size_dist(rng);
        const std::size_t budget = 2 + static_cast<std::size_t>(i % 3);
        const auto f = verify::random_instance(n, 4, derive_seed(1, "acc1", static_cast<std::uint64_t>(i)));
        const auto fn = verify::as_set_function(f);
        const auto greedy = verify::greedy_maximize(fn, budget);
        const auto opt = verify::brute_force_optimum(fn, budget);
        const double ratio = greedy.value / opt.value;
        ratio_sum += ratio;
        worst = std::min(worst, ratio);
        if (ratio < verify::kGreedyBound - 1e-12)
            return {false, fmt("instance %d ratio %.6f below 1-1/e", i, ratio)};
    }
    return {true, fmt("%d instances, every ratio >= 0.6321; mean %.4f, worst %.4f", instances,
                      ratio_sum / instances, worst)};
}

// ---- criterion 2: diminishing-returns suite ----

Outcome submodularity_suite() {
    const auto fl = verify::random_instance(12, 4, derive_seed(2, "fl"));
    const auto fl_fn = verify::as_set_function(fl);
    const auto rep = verify::check_diminishing_returns(fl_fn, 10000, derive_seed(2, "chains"));
    if (rep.violations != 0)
        return {false, fmt("facility location: %llu violations",
                           static_cast<unsigned long long>(rep.violations))};

    const auto fl2 = verify::random_instance(12, 4, derive_seed(2, "fl2"));
    const std::vector<verify::SetFunction> fs = {fl_fn, verify::as_set_function(fl2)};
    const std::vector<double> w = {0.3, 0.7};
    const auto combo = verify::check_weighted_combination(fs, w, 10000, derive_seed(2, "combo"));
    if (combo.violations != 0)
        return {false, fmt("weighted combination: %llu violations",
                           static_cast<unsigned long long>(combo.violations))};

    verify::SetFunction super{12, [](IndexSpan s) {
                                  const double m = static_cast<double>(s.size());
                                  return m * m;
                              }};
    const auto control = verify::check_diminishing_returns(super, 10000, derive_seed(2, "super"));
    if (control.violations == 0)
        return {false, "supermodular control produced no violations (checker is blind)"};
    return {true, fmt("10000 chains: FL 0, weighted 0, supermodular control %llu violations",
                      static_cast<unsigned long long>(control.violations))};
}

// ---- criterion 3: selective recomputation equals naive rescoring ----

Outcome cache_equivalence() {
    const auto ds = gen_gaussian_mixture({10, 1000, 16, 2.5, 1.0, 33});
    const auto split = split_pool_val(ds, 0.1, 12);
    RunConfig cfg;
    cfg.budget = 300;
    cfg.seed = 7;
    cfg.probe_epochs = 10;
    cfg.probe_lr = 0.05;
    const auto cached = run_mode(cfg, ds, split);
    RunConfig naive_cfg = cfg;
    naive_cfg.caching = false;
    const auto naive = run_mode(naive_cfg, ds, split);

    if (cached.selected != naive.selected || cached.selected_round != naive.selected_round)
        return {false, "selected sequences differ between cached and naive runs"};
    if (cached.rounds.size() != naive.rounds.size()) return {false, "round counts differ"};
    for (std::size_t t = 0; t < cached.rounds.size(); ++t) {
        const auto& a = cached.rounds[t];
        const auto& b = naive.rounds[t];
        const double tol = 1e-12;
        if (std::abs(a.temperature - b.temperature) > tol ||
            std::abs(a.p_base - b.p_base) > tol ||
            std::abs(a.val_accuracy - b.val_accuracy) > tol)
            return {false, fmt("round %d scalar logs differ beyond 1e-12", a.round)};
        for (std::size_t j = 0; j < 4; ++j) {
            if (std::abs(a.weights[j] - b.weights[j]) > tol ||
                std::abs(a.rewards[j] - b.rewards[j]) > tol ||
                std::abs(a.gains[j] - b.gains[j]) > tol ||
                std::abs(a.flagged_fraction[j] - b.flagged_fraction[j]) > tol)
                return {false, fmt("round %d strategy logs differ beyond 1e-12", a.round)};
        }
    }
    if (cached.total_distance_evals >= naive.total_distance_evals)
        return {false, fmt("cached run did not save distance evaluations (%llu vs %llu)",
                           static_cast<unsigned long long>(cached.total_distance_evals),
                           static_cast<unsigned long long>(naive.total_distance_evals))};
    return {true, fmt("identical selections and logs over %zu rounds; distance evals %llu "
                      "(cached) vs %llu (naive)",
                      cached.rounds.size(),
                      static_cast<unsigned long long>(cached.total_distance_evals),
                      static_cast<unsigned long long>(naive.total_distance_evals))};
}

// ---- criterion 4: controller algebra unit cases ----

Outcome controller_algebra() {
    const auto uniform = softmax_weights({2.0, 2.0, 2.0, 2.0}, 0.7);
    for (double v : uniform)
        if (std::abs(v - 0.25) > 1e-12) return {false, "softmax symmetry broke 0.25"};

    if (reward(-0.01, 0.25) != 0.0 || reward(0.0, 0.25) != 0.0)
        return {false, "reward indicator admits non-positive improvements"};
    if (std::abs(reward(0.02, 0.25) - 0.005) > 1e-12) return {false, "reward product wrong"};

    const Weights w_old = {0.25, 0.25, 0.25, 0.25};
    const Weights fresh = {0.5, 0.5 / 3, 0.5 / 3, 0.5 / 3};
    const auto at0 = blend_weights(w_old, fresh, 0.0);
    const auto at1 = blend_weights(w_old, fresh, 1.0);
    for (std::size_t j = 0; j < 4; ++j) {
        if (std::abs(at0[j] - w_old[j]) > 1e-12) return {false, "blend delta=0 is not identity"};
        if (std::abs(at1[j] - fresh[j]) > 1e-12) return {false, "blend delta=1 is not replacement"};
    }

    ControllerConfig cfg;
    if (std::abs(temperature(cfg, 1.0, 0.0) - 1.0) > 1e-12)
        return {false, "temperature at (b=1, e=0) is not tau0"};
    if (std::abs(temperature(cfg, 0.5, 0.5) - std::exp(-1.0)) > 1e-12)
        return {false, "temperature at (0.5, 0.5) is not exp(-1)"};
    return {true, "softmax symmetry, reward gating, blend endpoints, temperature exp(-1) all exact"};
}

// ---- criterion 5: weight convergence ----

Outcome weight_convergence() {
    ControllerConfig cfg;
    ControllerState state;
    state.budget_remaining = 0.5;
    state.epoch_progress = 0.5;
    const Weights gains = {0.03, 0.01, 0.0, 0.02};
    std::vector<Weights> history = {state.weights};
    for (int t = 0; t < 200; ++t) {
        state.budget_remaining = 0.5;
        state.epoch_progress = 0.5;
        state = round_update(state, cfg, gains);
        history.push_back(state.weights);
    }
    const auto stats = convergence_stats(history);
    if (!(stats.cumulative < 10.0))
        return {false, fmt("cumulative variation %.3f not < 10", stats.cumulative)};
    double worst_ratio = 0.0;
    for (std::size_t t = 5; t + 1 < stats.per_step_l2.size(); ++t) {
        if (stats.per_step_l2[t] < 1e-12) break;
        worst_ratio = std::max(worst_ratio, stats.per_step_l2[t + 1] / stats.per_step_l2[t]);
    }
    const double rate_bound = (1.0 - cfg.delta) + 0.01;
    if (worst_ratio > rate_bound)
        return {false, fmt("measured decay rate %.4f exceeds %.4f", worst_ratio, rate_bound)};

    // decaying schedule that reaches the tau_min=0.05 clamp, per-seed
    // stationary gains in percentage points (the scale run_mode feeds)
    ControllerConfig sched = cfg;
    sched.gamma = 5.0;
    sched.alpha_decay = 4.0;
    sched.beta_decay = 4.0;
    int stabilized_early = 0;
    const int rounds = 100;
    bool clamp_reached = false;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(derive_seed(5, "conv", seed));
        std::uniform_real_distribution<double> u(0.0, 3.0);
        const Weights g = {u(rng), u(rng), u(rng), u(rng)};
        ControllerState s;
        std::vector<Weights> hist = {s.weights};
        for (int t = 0; t < rounds; ++t) {
            s.budget_remaining = 1.0 - static_cast<double>(t) / rounds;
            s.epoch_progress = static_cast<double>(t) / rounds;
            s = round_update(s, sched, g);
            hist.push_back(s.weights);
        }
        clamp_reached = clamp_reached || s.temperature == sched.tau_min;
        const auto st = convergence_stats(hist);
        int settle = rounds;
        for (int t = static_cast<int>(st.per_step_l2.size()); t-- > 0;) {
            if (st.per_step_l2[static_cast<std::size_t>(t)] >= 1e-3) {
                settle = t + 1;
                break;
            }
            settle = t;
        }
        if (settle <= rounds * 3 / 10) ++stabilized_early;
    }
    if (!clamp_reached) return {false, "schedule never reached the tau_min clamp"};
    if (stabilized_early < 8)
        return {false, fmt("weights stabilized within 30%% of rounds in only %d/10 seeds",
                           stabilized_early)};
    return {true, fmt("rate %.4f <= %.2f, cumulative %.3f < 10, early stabilization %d/10 "
                      "with the tau_min=0.05 clamp active",
                      worst_ratio, rate_bound, stats.cumulative, stabilized_early)};
}

// ---- criterion 6: end-to-end efficacy at desk scale ----

Outcome desk_scale_efficacy() {
    const auto ds = gen_gaussian_mixture({10, 2000, 16, 2.6, 8.0, 4});
    double mode_sum = 0.0, random_sum = 0.0, uncertainty_sum = 0.0;
    const int seeds = 10;
    for (int s = 0; s < seeds; ++s) {
        RunConfig cfg;
        cfg.budget = 0.3;
        cfg.seed = static_cast<std::uint64_t>(1000 + s);
        cfg.probe_epochs = 20;
        cfg.probe_lr = 0.05;
        cfg.round_fraction = 0.07;
        cfg.controller.gamma = 5.0;
        const auto split = split_pool_val(ds, 0.1, cfg.seed);
        mode_sum += run_mode(cfg, ds, split).final_val_accuracy;
        random_sum += baseline_random(cfg, ds, split).final_val_accuracy;
        uncertainty_sum += baseline_uncertainty(cfg, ds, split).final_val_accuracy;
    }
    const double mode_mean = mode_sum / seeds;
    const double random_mean = random_sum / seeds;
    const double uncertainty_mean = uncertainty_sum / seeds;
    const double vs_random = 100.0 * (mode_mean - random_mean);
    const double vs_uncertainty = 100.0 * (mode_mean - uncertainty_mean);
    const bool pass = vs_random >= 2.0 && vs_uncertainty >= -0.5;
    return {pass, fmt("mean val acc: mode %.4f, random %.4f, uncertainty %.4f; "
                      "mode-random %+.2fpp (need >= 2.0), mode-uncertainty %+.2fpp (need >= -0.5)",
                      mode_mean, random_mean, uncertainty_mean, vs_random, vs_uncertainty)};
}

// ---- criterion 7: imbalance behavior ----

Dataset imbalanced_two_class(std::size_t n, std::size_t dim, double gap, double sigma_majority,
                             std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> axis(dim);
    double norm = 0.0;
    for (double& v : axis) {
        v = g(rng);
        norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : axis) v /= norm;
    Dataset ds;
    ds.n = n;
    ds.d = dim;
    ds.classes = 2;
    const std::size_t minority = n / 10;
    for (std::size_t i = 0; i < n; ++i) {
        const int y = i < minority ? 1 : 0;
        const double offset = y == 1 ? gap : 0.0;
        const double sigma = y == 1 ? 1.0 : sigma_majority;
        for (std::size_t j = 0; j < dim; ++j)
            ds.features.push_back(axis[j] * offset + sigma * g(rng));
        ds.labels.push_back(y);
    }
    ds.label_names = {"majority", "minority"};
    ds.validate();
    return ds;
}

Outcome imbalance_behavior() {
    const auto ds = imbalanced_two_class(2000, 8, 3.0, 1.8, 6);
    int class_balance_up = 0;
    double mode_recall = 0.0, random_recall = 0.0;
    const int seeds = 10;
    for (int s = 0; s < seeds; ++s) {
        RunConfig cfg;
        cfg.budget = 0.25;
        cfg.seed = static_cast<std::uint64_t>(9000 + s);
        cfg.probe_epochs = 20;
        cfg.probe_lr = 0.05;
        cfg.round_fraction = 0.07;
        cfg.controller.gamma = 5.0;
        cfg.init_fraction = 0.4;
        cfg.strategy_eval_k = 15;
        cfg.strategy_eval_epochs = 3;
        const auto split = split_pool_val(ds, 0.2, cfg.seed);
        const auto mode_run = run_mode(cfg, ds, split);
        const auto random_run = baseline_random(cfg, ds, split);

        const auto cb = static_cast<std::size_t>(StrategyId::ClassBalance);
        for (const auto& log : mode_run.rounds)
            if (log.round <= 2 && log.weights[cb] > 0.25) {
                ++class_balance_up;
                break;
            }

        auto minority_recall = [&](const SelectionRun& run) {
            auto probe = init_model(ds.d, 2, derive_seed(cfg.seed, "model"));
            IndexVec coreset(run.selected.begin(), run.selected.end());
            std::sort(coreset.begin(), coreset.end());
            train(probe, ds, coreset, split.val, 60, 0.05, 32, 1);
            return class_recall(probe, ds, split.val)[1];
        };
        mode_recall += minority_recall(mode_run);
        random_recall += minority_recall(random_run);
    }
    const double gap_pp = 100.0 * (mode_recall - random_recall) / seeds;
    const bool pass = class_balance_up >= 7 && gap_pp >= 5.0;
    return {pass, fmt("class-balance weight above 0.25 in rounds 1-2: %d/10 (need >= 7); "
                      "minority recall mode %.3f vs random %.3f, gap %+.2fpp (need >= 5)",
                      class_balance_up, mode_recall / seeds, random_recall / seeds, gap_pp)};
}

// ---- criterion 8: streaming bound ----

Outcome streaming_bound() {
    double worst = 1.0;
    const int instances = 50;
    for (int i = 0; i < instances; ++i) {
        const auto f = verify::random_instance(60, 4, derive_seed(8, "stream", static_cast<std::uint64_t>(i)));
        const auto fn = verify::as_set_function(f);
        const auto greedy = verify::greedy_maximize(fn, 8);
        stream::FacilityLocationObjective obj(f);
        IndexVec order(60);
        std::iota(order.begin(), order.end(), std::size_t{0});
        const auto sieve = stream::sieve_stream_maximize(obj, order, 8, 0.05);
        const double ratio = sieve.value / greedy.value;
        worst = std::min(worst, ratio);
        if (ratio < 0.45)
            return {false, fmt("instance %d streaming/greedy ratio %.4f below 0.45", i, ratio)};
    }
    return {true, fmt("%d instances, streaming value >= 0.45x greedy on every one (worst %.4f); "
                      "note: the stronger 1-1/e-eps single-pass claim is NOT verified here",
                      instances, worst)};
}

// ---- criterion 9: analytic gradients vs central differences ----

Outcome gradient_correctness() {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> jitter(-0.5, 0.5);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst_rel = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 3 + static_cast<std::size_t>(trial % 3);
        const std::size_t d = 2 + static_cast<std::size_t>(trial % 2);
        const int classes = 2 + trial % 3;
        Dataset ds;
        ds.n = n;
        ds.d = d;
        ds.classes = classes;
        for (std::size_t i = 0; i < n * d; ++i) ds.features.push_back(g(rng));
        for (std::size_t i = 0; i < n; ++i) ds.labels.push_back(static_cast<int>(i) % classes);
        ds.label_names.resize(static_cast<std::size_t>(classes), "x");
        ds.validate();

        auto model = init_model(d, static_cast<std::size_t>(classes),
                                derive_seed(9, "grad", static_cast<std::uint64_t>(trial)));
        for (auto& w : model.weights) w += jitter(rng);

        IndexVec idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        const auto analytic = loss_gradient(model, ds, idx);
        const double h = 1e-6;
        double diff2 = 0.0, num2 = 0.0;
        for (std::size_t p = 0; p < analytic.size(); ++p) {
            double* slot = p < model.weights.size() ? &model.weights[p]
                                                    : &model.bias[p - model.weights.size()];
            const double keep = *slot;
            *slot = keep + h;
            const double up = mean_loss(model, ds, idx);
            *slot = keep - h;
            const double down = mean_loss(model, ds, idx);
            *slot = keep;
            const double numeric = (up - down) / (2.0 * h);
            num2 += numeric * numeric;
            diff2 += (numeric - analytic[p]) * (numeric - analytic[p]);
        }
        const double rel = std::sqrt(diff2) / std::max(1e-12, std::sqrt(num2));
        worst_rel = std::max(worst_rel, rel);
        if (rel > 1e-4)
            return {false, fmt("trial %d relative gradient error %.2e exceeds 1e-4", trial, rel)};
    }
    return {true, fmt("100 random instances, worst relative error %.2e <= 1e-4", worst_rel)};
}

}  // namespace

int main() {
    std::printf("modesel acceptance suite\n");
    run(1, "greedy approximation bound", greedy_approximation);
    run(2, "submodularity suite", submodularity_suite);
    run(3, "cache equivalence", cache_equivalence);
    run(4, "controller algebra", controller_algebra);
    run(5, "weight convergence", weight_convergence);
    run(6, "desk-scale efficacy", desk_scale_efficacy);
    run(7, "imbalance behavior", imbalance_behavior);
    run(8, "streaming bound", streaming_bound);
    run(9, "gradient correctness", gradient_correctness);
    if (failures == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criteria FAILED\n", failures);
    return failures == 0 ? 0 : 1;
}
