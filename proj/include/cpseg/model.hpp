#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cpseg/grid.hpp"

namespace cpseg {

struct Tensor {
    int ch = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int c_, int h_, int w_)
        : ch(c_), h(h_), w(w_), v(static_cast<size_t>(c_) * h_ * w_, 0.0) {}

    double* plane(int c) { return v.data() + static_cast<size_t>(c) * h * w; }
    const double* plane(int c) const { return v.data() + static_cast<size_t>(c) * h * w; }
    double& at(int c, int y, int x) { return v[(static_cast<size_t>(c) * h + y) * w + x]; }
    double at(int c, int y, int x) const { return v[(static_cast<size_t>(c) * h + y) * w + x]; }
};

struct ConvLayer {
    int in_c = 0, out_c = 0, k = 3, stride = 1;
    std::vector<double> w; // [out_c][in_c][k][k]
    std::vector<double> b; // [out_c]
};

/// Fixed encoder-decoder: two stride-2 stages down, nearest-neighbor upsampling
/// with additive skips back up, logistic output head.
struct PredictorParams {
    std::array<ConvLayer, 7> layers;

    static PredictorParams architecture(); // shapes only, zero weights
    static PredictorParams he_init(uint64_t seed);

    size_t param_count() const;
    /// copies of all parameters in declaration order (weights then bias per layer)
    std::vector<double> flatten() const;
    void unflatten(const std::vector<double>& flat);
    static uint64_t arch_digest();
};

struct ForwardCache {
    Tensor x0, z1, a1, a2, z3, a3, a4, u5, z5s, d5, u6, z6s, d6, z7;
    ProbabilityMap prob;
};

/// Forward pass; image height and width must be divisible by 4.
ForwardCache forward(const PredictorParams& params, const ProbabilityMap& image);
ProbabilityMap predict(const PredictorParams& params, const ProbabilityMap& image);

/// Exact reverse-mode gradients of all parameters given d(loss)/d(prob).
PredictorParams backward(const PredictorParams& params, const ForwardCache& cache,
                         const std::vector<double>& grad_wrt_prob);

struct AdamState {
    std::vector<double> m, v;
    uint64_t t = 0;
};

struct Checkpoint {
    PredictorParams params;
    AdamState adam;
    uint32_t epoch = 0;
    uint64_t config_digest = 0;
};

/// "CPCK" file: version, architecture digest, config digest, epoch, Adam step,
/// parameters as little-endian f32 in declaration order, Adam moments as f64.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

struct TrainConfig {
    std::string loss = "bce";
    double sigma = 100.0;
    double delta = 3.0;
    double tau_bin = 0.5;
    double gamma = 2.0;
    double eps = 1e-7;
    double s_d = 1e-7;
    double lr = 1e-4;
    double lr_decay = 1e-5; // lr_e = lr / (1 + lr_decay * epoch)
    int epochs = 30;
    uint64_t seed = 1;
    int recompute_every = 1; // CP weight-map refresh interval, in visits per image
    bool no_ce = false;
    bool no_dice = false;
    bool no_weights = false;
    std::string pretrained; // checkpoint path; required for loss == "cp"

    uint64_t digest() const;
};

struct TrainSample {
    ProbabilityMap image;
    BinaryMask label;
};

struct TrainLog {
    std::vector<double> epoch_mean_loss;
};

/// Deterministic full-image SGD (batch size 1) with Adam. Throws on
/// non-finite loss and when CP training lacks a pretrained checkpoint.
Checkpoint train(const TrainConfig& config, const std::vector<TrainSample>& data,
                 TrainLog* log = nullptr);

} // namespace cpseg
