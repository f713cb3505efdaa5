#ifndef MODESEL_PROBE_HPP
#define MODESEL_PROBE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "modesel/dataset.hpp"

namespace modesel {

/// Multinomial logistic classifier used as the selection probe. Supplies
/// class probabilities, validation accuracy, loss, and gradient magnitude.
struct ProbeModel {
    std::size_t dim = 0;
    std::size_t classes = 0;
    std::vector<double> weights;  // classes x dim, row-major
    std::vector<double> bias;     // classes
    double temperature_scale = 1.0;
    int version = 0;  // bumped by train(); keys the model-score cache
};

struct TrainReport {
    std::vector<double> epoch_losses;
    double final_val_accuracy = 0.0;
    double grad_norm_last = 0.0;
    int epochs_run = 0;
};

/// Orthonormal linear map to the top-k principal directions.
struct Projection {
    std::size_t d = 0;
    std::size_t k = 0;
    std::vector<double> mean;   // d
    std::vector<double> basis;  // k x d, orthonormal rows
};

ProbeModel init_model(std::size_t d, std::size_t classes, std::uint64_t seed);

/// Mini-batch SGD on mean cross-entropy. Deterministic given the seed.
/// Throws Error on non-finite loss (divergence; lower the learning rate).
TrainReport train(ProbeModel& model, const Dataset& ds, IndexSpan train_idx, IndexSpan val_idx,
                  int epochs, double lr, int batch, std::uint64_t seed);

std::vector<double> predict_proba(const ProbeModel& model, std::span<const double> x);

double accuracy(const ProbeModel& model, const Dataset& ds, IndexSpan idx);
double mean_loss(const ProbeModel& model, const Dataset& ds, IndexSpan idx);

/// Mean cross-entropy gradient over idx, weights then bias (length C*d + C).
std::vector<double> loss_gradient(const ProbeModel& model, const Dataset& ds, IndexSpan idx);
double grad_magnitude(const ProbeModel& model, const Dataset& ds, IndexSpan idx);

Projection fit_projection(const Dataset& ds, IndexSpan idx, std::size_t k);
std::vector<double> project(const Projection& p, std::span<const double> x);

// Checkpoint: JSON shape metadata plus a base64 little-endian f32 blob.
void save_checkpoint(const ProbeModel& model, const std::string& path);
ProbeModel load_checkpoint(const std::string& path);

int predict_class(const ProbeModel& model, std::span<const double> x);

}  // namespace modesel

#endif
