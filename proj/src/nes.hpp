#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lcosd.hpp"
#include "mlp.hpp"

namespace lcnes::nes {

// Stopping-rule query points t_1=1 < ... < t_J = t_max, geometric with ratio
// sqrt(2) so low TEP counts are sampled densely.
struct CheckpointGrid {
    std::vector<std::uint64_t> points;
    std::uint64_t t_max = 1;

    std::size_t size() const { return points.size(); }
    // gap to the next checkpoint, with t_{J+1} = t_max (so the last gap is 0)
    std::uint64_t gap(std::size_t j_1based) const {
        return j_1based < points.size() ? points[j_1based] - points[j_1based - 1]
                                        : t_max - points.back();
    }
};

CheckpointGrid make_grid(std::uint64_t t_max);

// The 16 normalized state features for checkpoint j (1-based). `trace` must
// cover at least t_j TEPs. Metric features are normalized by the frame's
// total soft weight, reliabilities by the mean reliability, so the vector is
// invariant to positive LLR scaling.
std::array<double, kFeatureDim> extract_features(const channel::ReceivedFrame& frame,
                                                 const lcosd::LcosdContext& ctx,
                                                 std::span<const lcosd::TraceEntry> trace,
                                                 const CheckpointGrid& grid, std::size_t j);

struct CheckpointLabels {
    std::vector<int> y;                   // continuation indicator per reached checkpoint
    std::vector<std::uint64_t> residual;  // r_j = T - t_j
    std::uint64_t total_teps = 0;         // T
    std::size_t reached = 0;
};

// y_j = 1 iff the full-budget result is correct but the running best at t_j
// is not; requires a trace with best_correct flags filled.
CheckpointLabels label_checkpoints(const lcosd::Trace& trace, const CheckpointGrid& grid);

struct CheckpointSample {
    std::uint64_t frame_id = 0;
    double snr_db = 0.0;
    std::uint32_t j = 0;  // 1-based checkpoint index
    std::uint64_t t_j = 0;
    std::array<double, kFeatureDim> features{};
    int y = 0;
    std::uint64_t residual = 0;
    std::uint64_t total_teps = 0;
};

struct Dataset {
    std::string code_id;
    std::vector<CheckpointSample> rows;  // ordered by (frame_id, j)
};

// Full-budget trajectories for every (snr, frame) pair; frame streams are
// derived from (seed, snr_index, frame_index) so generation parallelizes
// without affecting the output.
Dataset gen_dataset(const gf2::LinearCode& code, std::span<const double> snr_db_list,
                    std::uint64_t frames_per_snr, int delta, std::uint64_t t_max,
                    const CheckpointGrid& grid, std::uint64_t seed, int workers = 1);

void write_dataset_csv(const Dataset& ds, const std::string& path);
Dataset load_dataset_csv(const std::string& path);

struct StoppingPolicy {
    const MlpModel* model = nullptr;
    double lambda = 1024.0;
    CheckpointGrid grid;
};

struct NesDecodeResult {
    gf2::BitVec codeword;
    double gamma = 0.0;
    std::uint64_t teps_used = 0;
    bool stopped_early = false;
};

// Runtime loop: expand one TEP at a time; at each reached checkpoint stop as
// soon as p_j <= Delta_j / lambda, returning the running best.
NesDecodeResult nes_decode(const lcosd::LcosdContext& ctx, const channel::ReceivedFrame& frame,
                           const StoppingPolicy& policy, std::uint64_t t_max);

}  // namespace lcnes::nes
