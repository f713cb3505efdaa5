#include "modesel/probe.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "json.hpp"

namespace modesel {

namespace {

void softmax_inplace(std::vector<double>& logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double& v : logits) {
        v = std::exp(v - m);
        z += v;
    }
    for (double& v : logits) v /= z;
}

std::vector<double> logits_of(const ProbeModel& model, std::span<const double> x) {
    std::vector<double> out(model.classes);
    for (std::size_t c = 0; c < model.classes; ++c) {
        double acc = model.bias[c];
        const double* w = model.weights.data() + c * model.dim;
        for (std::size_t j = 0; j < model.dim; ++j) acc += w[j] * x[j];
        out[c] = acc / model.temperature_scale;
    }
    return out;
}

// Accumulates the cross-entropy gradient of one sample into gw/gb.
void accumulate_gradient(const ProbeModel& model, std::span<const double> x, int label,
                         std::vector<double>& gw, std::vector<double>& gb) {
    auto probs = logits_of(model, x);
    softmax_inplace(probs);
    for (std::size_t c = 0; c < model.classes; ++c) {
        const double delta =
            (probs[c] - (static_cast<int>(c) == label ? 1.0 : 0.0)) / model.temperature_scale;
        gb[c] += delta;
        double* row = gw.data() + c * model.dim;
        for (std::size_t j = 0; j < model.dim; ++j) row[j] += delta * x[j];
    }
}

double sample_loss(const ProbeModel& model, std::span<const double> x, int label) {
    auto probs = logits_of(model, x);
    softmax_inplace(probs);
    const double p = std::max(probs[static_cast<std::size_t>(label)], 1e-300);
    return -std::log(p);
}

}  // namespace

ProbeModel init_model(std::size_t d, std::size_t classes, std::uint64_t seed) {
    if (d < 1 || classes < 2) throw Error("init_model: need d >= 1 and C >= 2");
    ProbeModel m;
    m.dim = d;
    m.classes = classes;
    m.weights.resize(classes * d);
    m.bias.assign(classes, 0.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-0.01, 0.01);
    for (double& w : m.weights) w = dist(rng);
    return m;
}

std::vector<double> predict_proba(const ProbeModel& model, std::span<const double> x) {
    if (x.size() != model.dim)
        throw Error("predict_proba: expected dimension " + std::to_string(model.dim) +
                    ", got " + std::to_string(x.size()));
    auto probs = logits_of(model, x);
    softmax_inplace(probs);
    return probs;
}

int predict_class(const ProbeModel& model, std::span<const double> x) {
    const auto logits = logits_of(model, x);
    return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

double accuracy(const ProbeModel& model, const Dataset& ds, IndexSpan idx) {
    if (idx.empty()) return 0.0;
    std::size_t hit = 0;
    for (std::size_t i : idx)
        if (predict_class(model, ds.row(i)) == ds.labels[i]) ++hit;
    return static_cast<double>(hit) / static_cast<double>(idx.size());
}

double mean_loss(const ProbeModel& model, const Dataset& ds, IndexSpan idx) {
    if (idx.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i : idx) acc += sample_loss(model, ds.row(i), ds.labels[i]);
    return acc / static_cast<double>(idx.size());
}

std::vector<double> loss_gradient(const ProbeModel& model, const Dataset& ds, IndexSpan idx) {
    if (idx.empty()) throw Error("loss_gradient: empty index set");
    std::vector<double> gw(model.classes * model.dim, 0.0);
    std::vector<double> gb(model.classes, 0.0);
    for (std::size_t i : idx) accumulate_gradient(model, ds.row(i), ds.labels[i], gw, gb);
    const double inv = 1.0 / static_cast<double>(idx.size());
    std::vector<double> out;
    out.reserve(gw.size() + gb.size());
    for (double v : gw) out.push_back(v * inv);
    for (double v : gb) out.push_back(v * inv);
    return out;
}

double grad_magnitude(const ProbeModel& model, const Dataset& ds, IndexSpan idx) {
    const auto g = loss_gradient(model, ds, idx);
    double acc = 0.0;
    for (double v : g) acc += v * v;
    return std::sqrt(acc);
}

TrainReport train(ProbeModel& model, const Dataset& ds, IndexSpan train_idx, IndexSpan val_idx,
                  int epochs, double lr, int batch, std::uint64_t seed) {
    if (train_idx.empty()) throw Error("train: empty training set");
    if (epochs < 1) throw Error("train: epochs must be >= 1");
    if (batch < 1) batch = 1;

    TrainReport report;
    std::mt19937_64 rng(seed);
    IndexVec order(train_idx.begin(), train_idx.end());
    std::vector<double> gw(model.classes * model.dim);
    std::vector<double> gb(model.classes);

    for (int e = 0; e < epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;  // sample-weighted, pre-update
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(batch));
            const double inv = 1.0 / static_cast<double>(stop - start);
            std::fill(gw.begin(), gw.end(), 0.0);
            std::fill(gb.begin(), gb.end(), 0.0);
            double batch_loss = 0.0;
            for (std::size_t r = start; r < stop; ++r) {
                const std::size_t i = order[r];
                batch_loss += sample_loss(model, ds.row(i), ds.labels[i]);
                accumulate_gradient(model, ds.row(i), ds.labels[i], gw, gb);
            }
            if (!std::isfinite(batch_loss))
                throw Error("train: non-finite loss at epoch " + std::to_string(e + 1) +
                            " (divergence; lower the learning rate)");
            epoch_loss += batch_loss;
            const double step = lr * inv;
            for (std::size_t j = 0; j < gw.size(); ++j) model.weights[j] -= step * gw[j];
            for (std::size_t c = 0; c < gb.size(); ++c) model.bias[c] -= step * gb[c];
        }
        report.epoch_losses.push_back(epoch_loss / static_cast<double>(order.size()));
    }
    report.epochs_run = epochs;
    report.final_val_accuracy = val_idx.empty() ? 0.0 : accuracy(model, ds, val_idx);
    report.grad_norm_last = grad_magnitude(model, ds, train_idx);
    ++model.version;
    return report;
}

Projection fit_projection(const Dataset& ds, IndexSpan idx, std::size_t k) {
    if (k < 1 || k > ds.d || k > idx.size())
        throw Error("fit_projection: k must satisfy 1 <= k <= min(d, |idx|)");

    const auto m = static_cast<Eigen::Index>(idx.size());
    const auto d = static_cast<Eigen::Index>(ds.d);
    Eigen::MatrixXd X(m, d);
    for (Eigen::Index r = 0; r < m; ++r) {
        const auto row = ds.row(idx[static_cast<std::size_t>(r)]);
        for (Eigen::Index j = 0; j < d; ++j) X(r, j) = row[static_cast<std::size_t>(j)];
    }
    const Eigen::RowVectorXd mean = X.colwise().mean();
    X.rowwise() -= mean;
    const double denom = m > 1 ? static_cast<double>(m - 1) : 1.0;
    const Eigen::MatrixXd cov = (X.transpose() * X) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error("fit_projection: eigensolver failed");

    Projection p;
    p.d = ds.d;
    p.k = k;
    p.mean.assign(mean.data(), mean.data() + d);
    p.basis.resize(k * ds.d);
    // eigenvalues ascending; take the trailing k columns, largest first
    for (std::size_t r = 0; r < k; ++r) {
        Eigen::VectorXd v = solver.eigenvectors().col(d - 1 - static_cast<Eigen::Index>(r));
        Eigen::Index argmax = 0;
        v.cwiseAbs().maxCoeff(&argmax);
        if (v(argmax) < 0.0) v = -v;  // fix the sign convention
        for (Eigen::Index j = 0; j < d; ++j)
            p.basis[r * ds.d + static_cast<std::size_t>(j)] = v(j);
    }
    return p;
}

std::vector<double> project(const Projection& p, std::span<const double> x) {
    if (x.size() != p.d) throw Error("project: dimension mismatch");
    std::vector<double> out(p.k, 0.0);
    for (std::size_t r = 0; r < p.k; ++r) {
        double acc = 0.0;
        const double* b = p.basis.data() + r * p.d;
        for (std::size_t j = 0; j < p.d; ++j) acc += b[j] * (x[j] - p.mean[j]);
        out[r] = acc;
    }
    return out;
}

namespace {

const char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<unsigned char>& data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    for (std::size_t i = 0; i < data.size(); i += 3) {
        std::uint32_t v = static_cast<std::uint32_t>(data[i]) << 16;
        if (i + 1 < data.size()) v |= static_cast<std::uint32_t>(data[i + 1]) << 8;
        if (i + 2 < data.size()) v |= data[i + 2];
        out.push_back(kB64[(v >> 18) & 63]);
        out.push_back(kB64[(v >> 12) & 63]);
        out.push_back(i + 1 < data.size() ? kB64[(v >> 6) & 63] : '=');
        out.push_back(i + 2 < data.size() ? kB64[v & 63] : '=');
    }
    return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
    std::vector<int> lut(256, -1);
    for (int i = 0; i < 64; ++i) lut[static_cast<unsigned char>(kB64[i])] = i;
    std::vector<unsigned char> out;
    std::uint32_t v = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=' || c == '\n') continue;
        const int s = lut[static_cast<unsigned char>(c)];
        if (s < 0) throw Error("invalid base64 payload");
        v = (v << 6) | static_cast<std::uint32_t>(s);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<unsigned char>((v >> bits) & 0xff));
        }
    }
    return out;
}

}  // namespace

void save_checkpoint(const ProbeModel& model, const std::string& path) {
    std::vector<unsigned char> blob;
    blob.reserve((model.weights.size() + model.bias.size()) * 4);
    auto push_f32 = [&blob](double v) {
        const float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        for (int s = 0; s < 32; s += 8) blob.push_back(static_cast<unsigned char>((bits >> s) & 0xff));
    };
    for (double v : model.weights) push_f32(v);
    for (double v : model.bias) push_f32(v);

    nlohmann::json j{{"format", "modesel-probe"},
                     {"dim", model.dim},
                     {"classes", model.classes},
                     {"temperature_scale", model.temperature_scale},
                     {"version", model.version},
                     {"dtype", "f32le"},
                     {"params", base64_encode(blob)}};
    std::ofstream out(path);
    if (!out) throw Error("cannot write checkpoint: " + path);
    out << j.dump(2) << "\n";
}

ProbeModel load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open checkpoint: " + path);
    nlohmann::json j;
    in >> j;
    ProbeModel m;
    m.dim = j.at("dim").get<std::size_t>();
    m.classes = j.at("classes").get<std::size_t>();
    m.temperature_scale = j.at("temperature_scale").get<double>();
    m.version = j.value("version", 0);
    const auto blob = base64_decode(j.at("params").get<std::string>());
    const std::size_t count = m.classes * m.dim + m.classes;
    if (blob.size() != count * 4) throw Error("checkpoint parameter blob has wrong size");
    auto read_f32 = [&blob](std::size_t i) {
        std::uint32_t bits = 0;
        for (int s = 0; s < 4; ++s)
            bits |= static_cast<std::uint32_t>(blob[i * 4 + static_cast<std::size_t>(s)]) << (8 * s);
        float f;
        std::memcpy(&f, &bits, 4);
        return static_cast<double>(f);
    };
    m.weights.resize(m.classes * m.dim);
    m.bias.resize(m.classes);
    for (std::size_t i = 0; i < m.weights.size(); ++i) m.weights[i] = read_f32(i);
    for (std::size_t c = 0; c < m.bias.size(); ++c) m.bias[c] = read_f32(m.weights.size() + c);
    return m;
}

}  // namespace modesel
