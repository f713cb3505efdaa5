#ifndef MODESEL_DATASET_HPP
#define MODESEL_DATASET_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "modesel/common.hpp"

namespace modesel {

/// Immutable labeled feature matrix. Labels are dense ids in [0, classes);
/// the original label strings are kept in label_names for provenance.
struct Dataset {
    std::size_t n = 0;
    std::size_t d = 0;
    int classes = 0;
    std::vector<double> features;  // n x d, row-major
    std::vector<int> labels;       // length n
    std::vector<std::string> label_names;  // dense id -> original label
    bool standardized = false;

    std::span<const double> row(std::size_t i) const {
        return {features.data() + i * d, d};
    }

    /// Throws DataError if any structural invariant is broken (label range,
    /// missing class, non-finite feature).
    void validate() const;
};

struct SplitSpec {
    IndexVec pool;
    IndexVec val;
    std::uint64_t seed = 0;
};

Dataset load_csv(const std::string& path, const std::string& label_column);
void save_csv(const Dataset& ds, const std::string& path,
              const std::string& label_column = "label");

// Binary container: magic "MSEL1", little-endian u64 n/d/C, n*d f32 features
// row-major, n u32 labels.
Dataset load_binary(const std::string& path);
void save_binary(const Dataset& ds, const std::string& path);

/// In-place per-column zero-mean unit-variance scaling (constant columns are
/// left centered only). Sets ds.standardized.
void standardize_columns(Dataset& ds);

/// Stratified pool/validation partition. Per-class validation counts follow
/// largest-remainder allocation of val_fraction, so they never deviate from
/// the proportional share by more than one sample.
SplitSpec split_pool_val(const Dataset& ds, double val_fraction, std::uint64_t seed);

/// Class-proportional sample of `count` indices drawn from `from`.
/// Remainder seats go to the largest fractional share; equal shares favor the
/// class with fewer allocated samples, then the lower class id.
IndexVec stratified_sample(const Dataset& ds, IndexSpan from, std::size_t count,
                           std::uint64_t seed);

/// Raw per-class counts over `subset` (not normalized; empty -> zeros).
std::vector<double> class_frequencies(const Dataset& ds, IndexSpan subset);

/// Largest-remainder seat allocation used by the stratified operations.
std::vector<std::size_t> allocate_largest_remainder(std::span<const std::size_t> group_sizes,
                                                    std::size_t count);

std::uint64_t dataset_hash(const Dataset& ds);

}  // namespace modesel

#endif
