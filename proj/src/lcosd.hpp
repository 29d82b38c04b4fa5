#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "channel.hpp"
#include "codes.hpp"
#include "gf2.hpp"

namespace lcnes::lcosd {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-frame decoding context. Positions are reliability-sorted; R holds the
// k+delta most reliable positions (rank-repaired so the complement L is
// independent in H) and the permuted parity matrix is reduced to
//   [ I  P1 ]
//   [ 0  P2 ]
// with the L block first. `arranged` maps arranged position -> original index,
// L part first, both parts in decreasing reliability.
struct LcosdContext {
    const gf2::LinearCode* code = nullptr;
    int n = 0, k = 0, delta = 0;

    std::vector<int> perm;               // sorted order -> original index (|llr| decreasing)
    std::vector<double> sorted_abs_llr;  // non-increasing
    std::vector<int> set_L;              // original indices, decreasing reliability
    std::vector<int> set_R;
    std::vector<int> arranged;           // set_L ++ set_R

    gf2::BitMatrix p1;   // (n-k-delta) x (k+delta) reconstruction matrix
    gf2::BitMatrix p2;   // delta x (k+delta) local parity-check matrix
    gf2::BitMatrix p1t;  // p1 transposed, row per R position

    std::vector<double> weights_L;  // |llr| over arranged L
    std::vector<double> weights_R;  // |llr| over arranged R
    gf2::BitVec z_l, z_r;           // hard decisions over arranged L / R

    std::uint32_t target_syndrome = 0;       // z_R * P2^T, bit j from row j
    std::vector<std::uint32_t> p2_cols;      // column r of P2 as a delta-bit word
    gf2::BitVec base_l_diff;                 // (z_R * P1^T) xor z_L

    std::size_t l_size() const { return std::size_t(n - k - delta); }
    std::size_t r_size() const { return std::size_t(k + delta); }
};

LcosdContext preprocess(const gf2::LinearCode& code, const channel::ReceivedFrame& frame,
                        int delta);

struct TepEvent {
    std::uint64_t t = 0;   // 1-based emission index
    gf2::BitVec e_r;       // k+delta bits over arranged R
    double gamma_r = 0.0;  // partial soft weight on R
    double gamma = 0.0;    // full soft weight of the reconstructed candidate
};

// Emits admissible TEPs (e_R * P2^T = z_R * P2^T) exactly once each, in
// non-decreasing gamma_r, ties broken by lexicographically smallest e_R.
// A backward pass over the 2^delta-state syndrome trellis yields the exact
// minimal completion cost per (stage, state); enumeration is then best-first,
// walking each popped prefix down its cheapest completion and deferring the
// sibling branches to the heap.
class TepStream {
public:
    explicit TepStream(const LcosdContext& ctx);

    bool next(TepEvent& ev);  // false once exhausted
    // minimal completion cost over everything not yet emitted; equals the
    // next emission's gamma_r up to floating-point rounding of the backward
    // pass. False once exhausted.
    bool peek_next_gamma_r(double* out) const;
    std::uint64_t emitted() const { return emitted_; }

private:
    struct Node {
        double f;  // g + exact minimal completion cost
        double g;  // cost of the prefix
        std::uint64_t bits_hi, bits_lo;  // chosen e bits, stage s at bit 63-s / 127-(s-64)
        std::uint32_t stage;
        std::uint32_t state;
    };
    struct PopsLater {
        bool operator()(const Node& a, const Node& b) const {
            if (a.f != b.f) return a.f > b.f;
            if (a.bits_hi != b.bits_hi) return a.bits_hi > b.bits_hi;
            return a.bits_lo > b.bits_lo;
        }
    };

    double suffix_at(std::uint32_t stage, std::uint32_t state) const {
        return suffix_[std::size_t(stage) * nstates_ + state];
    }
    void push(const Node& nd);
    void walk_and_emit(Node cur, TepEvent& ev);

    const LcosdContext* ctx_;
    std::uint32_t m_ = 0;  // stages = k + delta
    std::uint32_t nstates_ = 1;
    std::vector<double> suffix_;
    std::vector<Node> heap_;
    std::vector<std::uint64_t> diff_words_;  // scratch for the L-side metric
    Node root_{};
    bool root_pending_ = true;
    std::uint64_t emitted_ = 0;
};

// Rebuilds the n-bit candidate for an admissible TEP; throws on an
// inadmissible pattern.
gf2::BitVec reconstruct(const LcosdContext& ctx, const gf2::BitVec& e_r);

struct TraceEntry {
    double gamma_r = 0.0;
    double gamma = 0.0;
    bool improved = false;      // gamma_t^* strictly decreased at this step
    bool best_correct = false;  // running best equals the transmitted codeword
};
using Trace = std::vector<TraceEntry>;

struct SearchState {
    gf2::BitVec best_candidate;
    gf2::BitVec best_e_r;
    double best_gamma = kInf;
    std::uint64_t teps = 0;            // TEPs examined
    std::uint64_t last_improve_t = 0;
    bool exhausted = false;
};

// Runs the stream up to t_max (or exhaustion), keeping the running best.
// When `trace` is given every TEP is recorded; best_correct flags are filled
// when `transmitted` is also given.
SearchState decode_full(const LcosdContext& ctx, std::uint64_t t_max, Trace* trace = nullptr,
                        const gf2::BitVec* transmitted = nullptr);

// Identical output to decode_full, but stops as soon as the next TEP's
// gamma_r can no longer beat the running best (gamma >= gamma_r always).
SearchState decode_optimal_stop(const LcosdContext& ctx, std::uint64_t t_max);

// Classical order-m OSD on the most reliable basis, for reference checks.
gf2::BitVec decode_osd_reference(const gf2::LinearCode& code, const channel::ReceivedFrame& frame,
                                 int order, std::uint64_t enumeration_cap = 1u << 22);

// e_R of the transmitted codeword under this context (z_R xor c_R); the
// running best is correct exactly when best_e_r equals this.
gf2::BitVec transmitted_e_r(const LcosdContext& ctx, const gf2::BitVec& transmitted);

}  // namespace lcnes::lcosd
