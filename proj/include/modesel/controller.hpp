#ifndef MODESEL_CONTROLLER_HPP
#define MODESEL_CONTROLLER_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "modesel/common.hpp"

namespace modesel {

using Weights = std::array<double, 4>;

struct ControllerConfig {
    double tau0 = 1.0;
    double alpha_decay = 1.0;  // budget-consumption decay rate
    double beta_decay = 1.0;   // epoch-progress decay rate
    double tau_min = 0.05;
    double eta = 0.001;   // meta learning rate
    double gamma = 1.0;   // reward gain inside the softmax
    double delta = 0.2;   // blend factor between old and new weights
    int history_window = 3;
    bool use_weight_net = false;
};

/// Training state the controller sees each round plus the quantities it
/// maintains: effectiveness accumulators, simplex weights, temperature.
struct ControllerState {
    double epoch_progress = 0.0;   // e_t in [0,1]
    double val_accuracy = 0.0;     // a_t
    double grad_norm = 0.0;        // g_t, normalized by its running peak
    double budget_remaining = 1.0; // b_t in [0,1]
    Weights strategy_perf{};       // v_t: windowed mean of per-strategy gains
    Weights alpha{1.0, 1.0, 1.0, 1.0};
    Weights weights{0.25, 0.25, 0.25, 0.25};
    Weights last_rewards{};
    double temperature = 1.0;
    int round = 0;

    std::vector<Weights> gain_history;  // feeds the strategy_perf window
    double grad_norm_peak = 0.0;        // running max of the raw gradient norm
};

/// tau0 * exp(-alpha*(1-b)) * exp(-beta*e), clamped at tau_min.
double temperature(const ControllerConfig& cfg, double budget_remaining, double epoch_progress);

/// Credit gated on strict improvement: delta_val * w_j when delta_val > 0.
double reward(double delta_val, double w_j);

/// Multiplicative effectiveness accumulator: alpha * (1 + eta * r).
double update_alpha(double alpha_j, double eta, double r_j);

/// Max-subtracted softmax of values/tau.
Weights softmax_weights(const Weights& values, double tau);

/// (1-delta) * w_old + delta * alpha_hat, renormalized.
Weights blend_weights(const Weights& w_old, const Weights& alpha_hat, double delta);

struct WeightNet {
    std::vector<double> w1;  // 64 x 8
    std::vector<double> b1;  // 64
    std::vector<double> w2;  // 4 x 64
    std::vector<double> b2;  // 4

    static WeightNet zeros();
    static WeightNet random(std::uint64_t seed);
};

/// Raw 4-dim output of the two-layer ReLU net on the flattened 8-dim state.
Weights net_logits(const WeightNet& net, const ControllerState& state);
Weights net_forward(const WeightNet& net, const ControllerState& state, double tau);

/// One controller round: recompute temperature from the state's budget and
/// epoch progress, turn gains into rewards, softmax (1 + gamma*r) at the new
/// temperature, blend into the weights, advance the accumulators and the
/// gain window. Pure in (state, cfg, gains).
ControllerState round_update(const ControllerState& state, const ControllerConfig& cfg,
                             const Weights& per_strategy_gains,
                             const WeightNet* net = nullptr);

struct ConvergenceStats {
    std::vector<double> per_step_l2;
    double cumulative = 0.0;
};

ConvergenceStats convergence_stats(const std::vector<Weights>& weight_history);

/// Update running gradient peak and return the [0,1]-normalized magnitude.
double normalize_grad(ControllerState& state, double raw_grad_norm);

}  // namespace modesel

#endif
