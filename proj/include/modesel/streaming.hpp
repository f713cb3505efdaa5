#ifndef MODESEL_STREAMING_HPP
#define MODESEL_STREAMING_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "modesel/common.hpp"
#include "modesel/verify.hpp"

// Single-pass threshold (sieve) maximization over a monotone submodular
// objective. Geometrically spaced threshold levels are instantiated lazily
// from the running max singleton value; each level keeps a working set of at
// most `budget` elements and admits an arrival when its marginal gain clears
// (v/2 - f(S)) / (budget - |S|). The best level wins. Guarantees a
// (1/2 - eps) fraction of the optimum.

namespace modesel::stream {

struct SieveResult {
    IndexVec selected;  // admission order == arrival order
    double value = 0.0;
    std::size_t levels_instantiated = 0;
};

template <typename Objective>
SieveResult sieve_stream_maximize(const Objective& obj, IndexSpan order, std::size_t budget,
                                  double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw Error("sieve: eps must lie in (0,1)");
    if (budget == 0) return {};

    struct Level {
        typename Objective::State state;
        IndexVec members;
        double threshold = 0.0;
    };
    std::map<long, Level> levels;  // key i -> threshold (1+eps)^i
    const double log_base = std::log1p(eps);
    double max_singleton = 0.0;

    const auto empty_state = obj.make_state();
    for (std::size_t e : order) {
        const double singleton = obj.marginal(empty_state, e);
        max_singleton = std::max(max_singleton, singleton);
        if (max_singleton <= 0.0) continue;

        // instantiate missing levels in [m, 2*budget*m]; existing levels stay
        const long lo = static_cast<long>(std::ceil(std::log(max_singleton) / log_base - 1e-12));
        const long hi = static_cast<long>(std::floor(
            std::log(2.0 * static_cast<double>(budget) * max_singleton) / log_base + 1e-12));
        for (long i = lo; i <= hi; ++i) {
            if (levels.find(i) == levels.end())
                levels.emplace(i, Level{obj.make_state(), {}, std::pow(1.0 + eps, static_cast<double>(i))});
        }

        for (auto& [idx, level] : levels) {
            if (level.members.size() >= budget) continue;
            const double current = obj.value(level.state);
            const double bar = (level.threshold / 2.0 - current) /
                               static_cast<double>(budget - level.members.size());
            const double gain = obj.marginal(level.state, e);
            if (gain >= bar) {
                obj.add(level.state, e);
                level.members.push_back(e);
            }
        }
    }

    SieveResult best;
    best.levels_instantiated = levels.size();
    for (auto& [idx, level] : levels) {
        const double v = obj.value(level.state);
        if (v > best.value ||
            (v == best.value && level.members.size() > best.selected.size())) {
            best.value = v;
            best.selected = level.members;
        }
    }
    return best;
}

/// Sieve state for a plain facility-location objective.
class FacilityLocationObjective {
public:
    explicit FacilityLocationObjective(const verify::FacilityLocation& f) : f_(f) {}

    struct State {
        std::vector<double> coverage;
        double value = 0.0;
    };

    State make_state() const { return State{std::vector<double>(f_.n, 0.0), 0.0}; }

    double marginal(const State& s, std::size_t e) const {
        double gain = 0.0;
        for (std::size_t i = 0; i < f_.n; ++i)
            gain += std::max(0.0, f_.at(i, e) - s.coverage[i]);
        return gain;
    }

    void add(State& s, std::size_t e) const {
        for (std::size_t i = 0; i < f_.n; ++i) {
            const double sim = f_.at(i, e);
            if (sim > s.coverage[i]) {
                s.value += sim - s.coverage[i];
                s.coverage[i] = sim;
            }
        }
    }

    double value(const State& s) const { return s.value; }

private:
    const verify::FacilityLocation& f_;
};

/// Streaming surrogate for the combined selection score: modular utility
/// (uncertainty + boundary), concave class-balance credit, and a
/// facility-location coverage term for diversity, mixed by fixed weights.
class WeightedCoverageObjective {
public:
    WeightedCoverageObjective(const verify::FacilityLocation& f,
                              std::vector<double> modular,  // per-element utility
                              std::vector<int> labels, int classes, double smoothing,
                              double w_modular, double w_balance, double w_diversity)
        : fl_(f),
          modular_(std::move(modular)),
          labels_(std::move(labels)),
          classes_(classes),
          smoothing_(smoothing),
          w_modular_(w_modular),
          w_balance_(w_balance),
          w_diversity_(w_diversity) {}

    struct State {
        std::vector<double> coverage;
        std::vector<double> class_counts;
        double value = 0.0;
    };

    State make_state() const {
        return State{std::vector<double>(fl_.n, 0.0),
                     std::vector<double>(static_cast<std::size_t>(classes_), 0.0), 0.0};
    }

    double marginal(const State& s, std::size_t e) const {
        double gain = w_modular_ * modular_[e];
        gain += w_balance_ /
                (s.class_counts[static_cast<std::size_t>(labels_[e])] + smoothing_);
        if (w_diversity_ > 0.0) {
            double cover = 0.0;
            for (std::size_t i = 0; i < fl_.n; ++i)
                cover += std::max(0.0, fl_.at(i, e) - s.coverage[i]);
            gain += w_diversity_ * cover;
        }
        return gain;
    }

    void add(State& s, std::size_t e) const {
        s.value += marginal(s, e);
        s.class_counts[static_cast<std::size_t>(labels_[e])] += 1.0;
        if (w_diversity_ > 0.0)
            for (std::size_t i = 0; i < fl_.n; ++i)
                s.coverage[i] = std::max(s.coverage[i], fl_.at(i, e));
    }

    double value(const State& s) const { return s.value; }

private:
    const verify::FacilityLocation& fl_;
    std::vector<double> modular_;
    std::vector<int> labels_;
    int classes_;
    double smoothing_;
    double w_modular_;
    double w_balance_;
    double w_diversity_;
};

}  // namespace modesel::stream

#endif
