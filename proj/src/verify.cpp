#include "modesel/verify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "modesel/kernels.hpp"

namespace modesel::verify {

FacilityLocation make_facility_location(std::span<const double> points, std::size_t n,
                                        std::size_t dim) {
    if (points.size() != n * dim) throw Error("make_facility_location: shape mismatch");
    std::vector<double> sq(n * n, 0.0);
    std::vector<double> off;
    off.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d2 =
                kernels::squared_distance(points.data() + i * dim, points.data() + j * dim, dim);
            sq[i * n + j] = d2;
            sq[j * n + i] = d2;
            off.push_back(std::sqrt(d2));
        }
    }
    double sigma2 = 1.0;
    if (!off.empty()) {
        std::nth_element(off.begin(), off.begin() + static_cast<std::ptrdiff_t>(off.size() / 2),
                         off.end());
        const double median = off[off.size() / 2];
        if (median > 0.0) sigma2 = median * median;
    }
    FacilityLocation f;
    f.n = n;
    f.sim.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            f.sim[i * n + j] = i == j ? 1.0 : std::exp(-sq[i * n + j] / (2.0 * sigma2));
    return f;
}

FacilityLocation random_instance(std::size_t n, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> points(n * dim);
    for (double& v : points) v = gauss(rng);
    return make_facility_location(points, n, dim);
}

double fl_value(const FacilityLocation& f, IndexSpan subset) {
    if (subset.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < f.n; ++i) {
        double best = 0.0;
        for (std::size_t j : subset) best = std::max(best, f.at(i, j));
        total += best;
    }
    return total;
}

SetFunction as_set_function(const FacilityLocation& f) {
    return SetFunction{f.n, [f](IndexSpan s) { return fl_value(f, s); }};
}

DiminishingReport check_diminishing_returns(const SetFunction& f, std::uint64_t trials,
                                            std::uint64_t seed) {
    const std::size_t n = f.ground_size;
    if (n > 16) throw Error("check_diminishing_returns: ground set capped at 16");
    DiminishingReport report;
    report.trials = trials;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> coin(0, 2);

    IndexVec small, large, outside;
    for (std::uint64_t t = 0; t < trials; ++t) {
        small.clear();
        large.clear();
        outside.clear();
        // three-way split: in A and B / in B only / outside B
        for (std::size_t e = 0; e < n; ++e) {
            switch (coin(rng)) {
                case 0:
                    small.push_back(e);
                    large.push_back(e);
                    break;
                case 1:
                    large.push_back(e);
                    break;
                default:
                    outside.push_back(e);
            }
        }
        if (outside.empty()) continue;
        const std::size_t v =
            outside[std::uniform_int_distribution<std::size_t>(0, outside.size() - 1)(rng)];

        const double base_small = f.evaluate(small);
        const double base_large = f.evaluate(large);
        small.push_back(v);
        large.push_back(v);
        const double gain_small = f.evaluate(small) - base_small;
        const double gain_large = f.evaluate(large) - base_large;
        small.pop_back();
        large.pop_back();

        const double gap = gain_large - gain_small;
        if (gap > 1e-9) {
            ++report.violations;
            report.max_gap = std::max(report.max_gap, gap);
        }
    }
    return report;
}

DiminishingReport check_weighted_combination(const std::vector<SetFunction>& fs,
                                             std::span<const double> weights,
                                             std::uint64_t trials, std::uint64_t seed) {
    if (fs.empty() || fs.size() != weights.size())
        throw Error("check_weighted_combination: need one weight per function");
    for (double w : weights)
        if (w < 0.0) throw Error("check_weighted_combination: weights must be nonnegative");
    const std::size_t n = fs.front().ground_size;
    for (const auto& f : fs)
        if (f.ground_size != n)
            throw Error("check_weighted_combination: mismatched ground sets");

    std::vector<double> w(weights.begin(), weights.end());
    SetFunction combo{n, [fs, w](IndexSpan s) {
                          double acc = 0.0;
                          for (std::size_t i = 0; i < fs.size(); ++i)
                              if (w[i] != 0.0) acc += w[i] * fs[i].evaluate(s);
                          return acc;
                      }};
    return check_diminishing_returns(combo, trials, seed);
}

GreedyResult greedy_maximize(const SetFunction& f, std::size_t budget) {
    if (budget > f.ground_size) throw Error("greedy_maximize: budget exceeds ground set");
    GreedyResult result;
    result.value = f.evaluate({});
    std::vector<bool> taken(f.ground_size, false);
    IndexVec candidate;
    for (std::size_t step = 0; step < budget; ++step) {
        double best_gain = -std::numeric_limits<double>::infinity();
        std::size_t best_e = f.ground_size;
        for (std::size_t e = 0; e < f.ground_size; ++e) {
            if (taken[e]) continue;
            candidate = result.subset;
            candidate.push_back(e);
            const double gain = f.evaluate(candidate) - result.value;
            if (gain > best_gain) {  // strict: first (lowest id) wins ties
                best_gain = gain;
                best_e = e;
            }
        }
        taken[best_e] = true;
        result.subset.push_back(best_e);
        result.value += best_gain;
        result.marginal_gains.push_back(best_gain);
    }
    result.value = f.evaluate(result.subset);  // re-evaluate to shed accumulation error
    return result;
}

namespace {
double binomial_guard(std::size_t n, std::size_t k) {
    double c = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        c *= static_cast<double>(n - i) / static_cast<double>(i + 1);
        if (c > 2e6) return c;
    }
    return c;
}
}  // namespace

GreedyResult brute_force_optimum(const SetFunction& f, std::size_t budget) {
    if (budget > f.ground_size) throw Error("brute_force_optimum: budget exceeds ground set");
    if (binomial_guard(f.ground_size, budget) > 1e6)
        throw Error("brute_force_optimum: too many subsets (guard at 1e6)");

    GreedyResult best;
    IndexVec subset(budget);
    std::iota(subset.begin(), subset.end(), std::size_t{0});
    best.subset = subset;
    best.value = f.evaluate(subset);
    if (budget == 0) return best;

    // lexicographic combination walk
    while (true) {
        std::size_t i = budget;
        while (i > 0 && subset[i - 1] == f.ground_size - budget + i - 1) --i;
        if (i == 0) break;
        ++subset[i - 1];
        for (std::size_t j = i; j < budget; ++j) subset[j] = subset[j - 1] + 1;
        const double value = f.evaluate(subset);
        if (value > best.value) {
            best.value = value;
            best.subset = subset;
        }
    }
    return best;
}

std::vector<CurvePoint> approximation_curve(std::size_t n, std::size_t dim,
                                            std::span<const std::size_t> budgets,
                                            std::size_t instances, std::uint64_t seed) {
    std::vector<CurvePoint> curve;
    for (std::size_t budget : budgets) {
        CurvePoint point;
        point.budget = budget;
        point.min_ratio = 1.0;
        double sum = 0.0;
        for (std::size_t inst = 0; inst < instances; ++inst) {
            const auto f = random_instance(n, dim, derive_seed(seed, "curve", inst));
            const auto sf = as_set_function(f);
            const auto greedy = greedy_maximize(sf, budget);
            const auto opt = brute_force_optimum(sf, budget);
            const double ratio = opt.value > 0.0 ? greedy.value / opt.value : 1.0;
            sum += ratio;
            point.min_ratio = std::min(point.min_ratio, ratio);
        }
        point.mean_ratio = sum / static_cast<double>(instances);
        curve.push_back(point);
    }
    return curve;
}

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write curve csv: " + path);
    out << "budget,mean_ratio,min_ratio\n";
    for (const auto& p : curve)
        out << p.budget << "," << format_double(p.mean_ratio) << ","
            << format_double(p.min_ratio) << "\n";
}

}  // namespace modesel::verify
