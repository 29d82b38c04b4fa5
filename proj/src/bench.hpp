#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "codes.hpp"
#include "nes.hpp"

namespace lcnes::bench {

enum class Policy {
    full_budget,   // run to t_max or exhaustion
    optimal_stop,  // stop once the next gamma_r cannot beat the running best
    fixed_stall,   // stop after `stall_budget` consecutive TEPs without improvement
    genie,         // stop the moment the running best equals the transmitted codeword
    nes,           // learned checkpoint rule, p_j <= Delta_j / lambda
};

Policy parse_policy(const std::string& name);
const char* policy_name(Policy p);

struct BenchConfig {
    const gf2::LinearCode* code = nullptr;
    Policy policy = Policy::full_budget;
    double lambda = 1024.0;                  // nes only
    const nes::MlpModel* model = nullptr;    // nes only
    std::uint64_t stall_budget = 64;         // fixed_stall only
    std::vector<double> snr_db;
    std::uint64_t frames = 1000;
    int delta = 8;
    std::uint64_t t_max = 16384;
    std::uint64_t seed = 1;
    int workers = 1;
};

struct PointStats {
    double snr_db = 0.0;
    std::uint64_t frames = 0;
    std::uint64_t frame_errors = 0;
    double fer = 0.0;
    double fer_ci95 = 0.0;  // Wilson 95% half-width
    double avg_tep = 0.0;
    std::uint64_t tep_p50 = 0;
    std::uint64_t tep_p95 = 0;
    std::uint64_t tep_max = 0;
    double wall_s = 0.0;
};

struct BenchResult {
    Policy policy = Policy::full_budget;
    double lambda = 0.0;  // meaningful for nes only
    std::vector<PointStats> points;
};

// Frame streams derive from (seed, snr_index, frame_index): the same seed
// replays the same noise for every policy and lambda, and results do not
// depend on the worker count.
BenchResult run(const BenchConfig& cfg);

// One result per lambda over shared channel noise.
std::vector<BenchResult> sweep_lambda(const BenchConfig& cfg, std::span<const double> lambdas);

double wilson_half_width_95(std::uint64_t errors, std::uint64_t frames);

// code,policy,lambda,snr_db,frames,frame_errors,fer,fer_ci95,avg_tep,tep_p95,wall_s
void write_csv(std::ostream& out, const std::string& code_id,
               std::span<const BenchResult> results);

}  // namespace lcnes::bench
