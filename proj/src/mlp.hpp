#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace lcnes::nes {

inline constexpr int kFeatureDim = 16;

// 16-128-128-1 estimator; rectifier hidden layers, scalar logit output,
// inverted dropout (rate 0.1) after each hidden activation while training.
struct MlpModel {
    std::vector<int> dims{kFeatureDim, 128, 128, 1};
    std::vector<Eigen::MatrixXd> weights;  // dims[l] x dims[l+1]
    std::vector<Eigen::VectorXd> biases;   // dims[l+1]
    double dropout_rate = 0.1;

    bool empty() const { return weights.empty(); }
};

// zero-mean uniform fan-in init for weights, zero biases
MlpModel mlp_init(std::mt19937_64& rng);
MlpModel mlp_init(std::uint64_t seed);

// Single-sample logit. Training mode draws dropout masks from rng (one
// uniform per hidden unit, layer by layer); evaluation mode is deterministic.
double mlp_forward(const MlpModel& model, std::span<const double> features, bool training,
                   std::mt19937_64* rng);

double sigmoid(double x);
double softplus(double x);  // overflow-safe log(1 + e^x)

// Text format, exact round-trip:
//   nes-mlp v1 16 128 128 1
//   W <rows> <cols> \n rows... \n b <len> \n biases...
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace lcnes::nes
