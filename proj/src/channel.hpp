#pragma once

#include <random>
#include <span>
#include <vector>

#include "gf2.hpp"

namespace lcnes::channel {

// sigma^2 = 1 / (2 R 10^(EbN0/10)) for unit-energy BPSK
double ebn0_to_sigma2(double ebn0_db, double rate);

struct ReceivedFrame {
    std::vector<double> y;    // channel outputs
    std::vector<double> llr;  // 2 y_i / sigma^2
    gf2::BitVec z;            // hard decisions, z_i = 0 iff y_i >= 0
    double sigma2 = 0.0;
    double total_soft_weight = 0.0;  // S = sum |llr_i|
    double mean_reliability = 0.0;   // S / n
};

// Deterministic per-frame random stream. mt19937_64 output is fully pinned by
// the standard; gaussians use the Marsaglia polar method on 53-bit uniforms,
// so a stream replays identically for a given (seed, snr_index, frame_index).
class FrameRng {
public:
    explicit FrameRng(std::uint64_t seed) : eng_(seed) {}

    static FrameRng for_frame(std::uint64_t seed, std::uint64_t snr_index,
                              std::uint64_t frame_index);

    std::uint64_t next_u64() { return eng_(); }

    // uniform in [0,1) with 53 random bits
    double next_unit() { return double(eng_() >> 11) * 0x1.0p-53; }

    double next_gaussian();

    gf2::BitVec random_bits(std::size_t n);

    std::uint64_t next_below(std::uint64_t bound);  // unbiased [0, bound)

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

ReceivedFrame transmit(const gf2::BitVec& codeword, double sigma2, FrameRng& rng);

// Gamma(candidate) = sum of |llr_i| over positions where candidate != z
double soft_weight(std::span<const double> llr, const gf2::BitVec& candidate,
                   const gf2::BitVec& z);

}  // namespace lcnes::channel
