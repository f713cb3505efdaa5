#ifndef MODESEL_VERIFY_HPP
#define MODESEL_VERIFY_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "modesel/common.hpp"

// Independent oracles for the selection theory: diminishing-returns checks,
// facility-location coverage, brute-force optima, and the greedy ratio curve.

namespace modesel::verify {

struct SetFunction {
    std::size_t ground_size = 0;
    std::function<double(IndexSpan)> evaluate;
};

/// Coverage objective over a symmetric similarity matrix with unit diagonal:
/// value(S) = sum_i max_{j in S} sim(i, j); empty set scores 0.
struct FacilityLocation {
    std::size_t n = 0;
    std::vector<double> sim;  // n x n

    double at(std::size_t i, std::size_t j) const { return sim[i * n + j]; }
};

/// RBF similarity from points (n x dim, row-major), bandwidth = median
/// pairwise distance. Entries land in [0,1] with ones on the diagonal.
FacilityLocation make_facility_location(std::span<const double> points, std::size_t n,
                                        std::size_t dim);

/// Random Gaussian point cloud turned into a facility-location instance.
FacilityLocation random_instance(std::size_t n, std::size_t dim, std::uint64_t seed);

double fl_value(const FacilityLocation& f, IndexSpan subset);
SetFunction as_set_function(const FacilityLocation& f);

struct DiminishingReport {
    std::uint64_t trials = 0;
    std::uint64_t violations = 0;
    double max_gap = 0.0;  // worst observed gain(B) - gain(A)
};

/// Samples random chains A subset of B, v outside B, and counts violations
/// of gain(A) >= gain(B) beyond 1e-9.
DiminishingReport check_diminishing_returns(const SetFunction& f, std::uint64_t trials,
                                            std::uint64_t seed);

DiminishingReport check_weighted_combination(const std::vector<SetFunction>& fs,
                                             std::span<const double> weights,
                                             std::uint64_t trials, std::uint64_t seed);

struct GreedyResult {
    IndexVec subset;
    double value = 0.0;
    std::vector<double> marginal_gains;
};

/// Cardinality-constrained greedy, ties by lowest element id.
GreedyResult greedy_maximize(const SetFunction& f, std::size_t budget);

/// Exhaustive optimum; refuses when C(n, budget) exceeds 1e6 subsets.
GreedyResult brute_force_optimum(const SetFunction& f, std::size_t budget);

struct CurvePoint {
    std::size_t budget = 0;
    double mean_ratio = 0.0;
    double min_ratio = 0.0;
};

/// greedy/optimum ratio across random instances per budget; every ratio must
/// clear 1 - 1/e, and a budget of n must reach ratio 1.
std::vector<CurvePoint> approximation_curve(std::size_t n, std::size_t dim,
                                            std::span<const std::size_t> budgets,
                                            std::size_t instances, std::uint64_t seed);

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path);

inline constexpr double kGreedyBound = 0.63212055882855767;  // 1 - 1/e

}  // namespace modesel::verify

#endif
