#include "modesel/controller.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace modesel {

double temperature(const ControllerConfig& cfg, double budget_remaining, double epoch_progress) {
    const double raw = cfg.tau0 * std::exp(-cfg.alpha_decay * (1.0 - budget_remaining)) *
                       std::exp(-cfg.beta_decay * epoch_progress);
    return std::max(cfg.tau_min, raw);
}

double reward(double delta_val, double w_j) {
    return delta_val > 0.0 ? delta_val * w_j : 0.0;
}

double update_alpha(double alpha_j, double eta, double r_j) {
    return alpha_j * (1.0 + eta * r_j);
}

Weights softmax_weights(const Weights& values, double tau) {
    if (!(tau > 0.0)) throw Error("softmax_weights: temperature must be positive");
    const double m = *std::max_element(values.begin(), values.end());
    Weights out{};
    double z = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
        out[j] = std::exp((values[j] - m) / tau);
        z += out[j];
    }
    for (double& v : out) v /= z;
    return out;
}

namespace {
void check_simplex(const Weights& w, const char* who) {
    double sum = 0.0;
    for (double v : w) {
        if (v < -1e-12) throw Error(std::string(who) + ": negative weight");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error(std::string(who) + ": weights must sum to 1");
}
}  // namespace

Weights blend_weights(const Weights& w_old, const Weights& alpha_hat, double delta) {
    if (delta < 0.0 || delta > 1.0) throw Error("blend_weights: delta must lie in [0,1]");
    check_simplex(w_old, "blend_weights");
    check_simplex(alpha_hat, "blend_weights");
    Weights out{};
    double sum = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
        out[j] = (1.0 - delta) * w_old[j] + delta * alpha_hat[j];
        sum += out[j];
    }
    for (double& v : out) v /= sum;
    return out;
}

WeightNet WeightNet::zeros() {
    WeightNet net;
    net.w1.assign(64 * 8, 0.0);
    net.b1.assign(64, 0.0);
    net.w2.assign(4 * 64, 0.0);
    net.b2.assign(4, 0.0);
    return net;
}

WeightNet WeightNet::random(std::uint64_t seed) {
    WeightNet net = zeros();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d1(-std::sqrt(1.0 / 8.0), std::sqrt(1.0 / 8.0));
    std::uniform_real_distribution<double> d2(-std::sqrt(1.0 / 64.0), std::sqrt(1.0 / 64.0));
    for (double& w : net.w1) w = d1(rng);
    for (double& w : net.w2) w = d2(rng);
    return net;
}

Weights net_logits(const WeightNet& net, const ControllerState& state) {
    const std::array<double, 8> in = {state.epoch_progress, state.val_accuracy,
                                      state.grad_norm,      state.budget_remaining,
                                      state.strategy_perf[0], state.strategy_perf[1],
                                      state.strategy_perf[2], state.strategy_perf[3]};
    std::array<double, 64> hidden{};
    for (std::size_t h = 0; h < 64; ++h) {
        double acc = net.b1[h];
        for (std::size_t j = 0; j < 8; ++j) acc += net.w1[h * 8 + j] * in[j];
        hidden[h] = std::max(acc, 0.0);
    }
    Weights out{};
    for (std::size_t o = 0; o < 4; ++o) {
        double acc = net.b2[o];
        for (std::size_t h = 0; h < 64; ++h) acc += net.w2[o * 64 + h] * hidden[h];
        out[o] = acc;
    }
    return out;
}

Weights net_forward(const WeightNet& net, const ControllerState& state, double tau) {
    return softmax_weights(net_logits(net, state), tau);
}

ControllerState round_update(const ControllerState& state, const ControllerConfig& cfg,
                             const Weights& per_strategy_gains, const WeightNet* net) {
    ControllerState next = state;
    next.temperature = temperature(cfg, state.budget_remaining, state.epoch_progress);

    Weights r{};
    for (std::size_t j = 0; j < 4; ++j) r[j] = reward(per_strategy_gains[j], state.weights[j]);
    next.last_rewards = r;

    Weights values{};
    if (cfg.use_weight_net && net != nullptr) {
        const Weights logits = net_logits(*net, state);
        for (std::size_t j = 0; j < 4; ++j) values[j] = logits[j] + cfg.gamma * r[j];
    } else {
        for (std::size_t j = 0; j < 4; ++j) values[j] = 1.0 + cfg.gamma * r[j];
    }
    const Weights alpha_hat = softmax_weights(values, next.temperature);
    next.weights = blend_weights(state.weights, alpha_hat, cfg.delta);

    for (std::size_t j = 0; j < 4; ++j) next.alpha[j] = update_alpha(state.alpha[j], cfg.eta, r[j]);

    next.gain_history.push_back(per_strategy_gains);
    const std::size_t window = static_cast<std::size_t>(std::max(cfg.history_window, 1));
    const std::size_t take = std::min(window, next.gain_history.size());
    Weights perf{};
    for (std::size_t h = next.gain_history.size() - take; h < next.gain_history.size(); ++h)
        for (std::size_t j = 0; j < 4; ++j) perf[j] += next.gain_history[h][j];
    for (double& v : perf) v /= static_cast<double>(take);
    next.strategy_perf = perf;

    next.round = state.round + 1;
    return next;
}

ConvergenceStats convergence_stats(const std::vector<Weights>& weight_history) {
    if (weight_history.size() < 2)
        throw Error("convergence_stats: need at least two weight vectors");
    ConvergenceStats stats;
    stats.per_step_l2.reserve(weight_history.size() - 1);
    for (std::size_t t = 1; t < weight_history.size(); ++t) {
        double acc = 0.0;
        for (std::size_t j = 0; j < 4; ++j) {
            const double diff = weight_history[t][j] - weight_history[t - 1][j];
            acc += diff * diff;
        }
        const double step = std::sqrt(acc);
        stats.per_step_l2.push_back(step);
        stats.cumulative += step;
    }
    return stats;
}

double normalize_grad(ControllerState& state, double raw_grad_norm) {
    state.grad_norm_peak = std::max(state.grad_norm_peak, raw_grad_norm);
    if (state.grad_norm_peak <= 0.0) return 0.0;
    return std::clamp(raw_grad_norm / state.grad_norm_peak, 0.0, 1.0);
}

}  // namespace modesel
