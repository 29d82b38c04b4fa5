#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "mlp.hpp"
#include "nes.hpp"

namespace lcnes::nes {

struct TrainConfig {
    double alpha = 12.0;         // premature-stop weight
    double kappa = 16384.0;      // residual-effort normalizer
    double beta = 0.05;          // monotonicity regularizer weight
    int steps = 12000;
    double learning_rate = 5e-4;
    double weight_decay = 1e-4;  // decoupled
    double grad_clip = 1.0;      // global norm
    int batch_frames = 64;
    std::uint64_t seed = 1;
};

// A batch of whole frames: sample s belongs to the frame whose offset range
// contains it. Keeping frames intact is required by the monotonicity term.
struct Batch {
    Eigen::MatrixXd features;          // S x 16
    Eigen::VectorXd y;                 // S, in {0,1}
    Eigen::VectorXd residual;          // S, r_j
    std::vector<int> frame_offsets;    // F+1 boundaries into the rows
};

struct FrameIndex {
    std::vector<std::pair<std::size_t, std::size_t>> spans;  // [begin, end) per frame
};

FrameIndex index_frames(const Dataset& ds);
Batch make_batch(const Dataset& ds, const FrameIndex& idx, std::span<const std::size_t> frames);

struct Gradients {
    std::vector<Eigen::MatrixXd> dw;
    std::vector<Eigen::VectorXd> db;
};

// L = L_main + beta * L_mono over the batch (frame means, then batch mean).
// With `grads` non-null the exact parameter gradients are accumulated.
// Dropout masks, when enabled, are drawn from rng layer by layer in row-major
// sample order.
double loss_batch(const MlpModel& model, const Batch& batch, const TrainConfig& cfg,
                  bool use_dropout, std::mt19937_64* rng, Gradients* grads,
                  double* main_out = nullptr, double* mono_out = nullptr);

struct TrainResult {
    MlpModel model;
    std::vector<double> loss_curve;  // pre-update loss per step
};

// Adam (0.9/0.999, eps 1e-8) with decoupled weight decay and global-norm
// gradient clipping; batches sample whole frames. Deterministic given seed.
TrainResult train(const Dataset& ds, const TrainConfig& cfg);

}  // namespace lcnes::nes
