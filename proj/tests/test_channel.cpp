#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "channel.hpp"
#include "codes.hpp"
#include "oracles.hpp"

using namespace lcnes;

TEST_CASE("ebn0 to sigma2 mapping") {
    CHECK(channel::ebn0_to_sigma2(0.0, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(channel::ebn0_to_sigma2(3.0, 0.5) == doctest::Approx(0.501187).epsilon(1e-6));
    CHECK(channel::ebn0_to_sigma2(60.0, 0.5) < 1e-5);  // high snr limit
    CHECK(channel::ebn0_to_sigma2(10.0, 0.5) < channel::ebn0_to_sigma2(0.0, 0.5));
    CHECK_THROWS_AS(channel::ebn0_to_sigma2(0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(channel::ebn0_to_sigma2(0.0, -1.0), std::invalid_argument);
}

TEST_CASE("transmit populates the frame per its invariants") {
    auto code = gf2::build_rm(1, 3);
    auto rng = channel::FrameRng(42);
    gf2::BitVec cw = gf2::encode(code, rng.random_bits(4));
    channel::ReceivedFrame f = channel::transmit(cw, 0.8, rng);

    double s = 0.0;
    for (std::size_t i = 0; i < f.llr.size(); ++i) {
        CHECK(f.llr[i] == 2.0 * f.y[i] / f.sigma2);  // definitional, bit for bit
        CHECK(f.z.get(i) == (f.y[i] < 0.0));
        s += std::abs(f.llr[i]);
    }
    CHECK(f.total_soft_weight == doctest::Approx(s).epsilon(1e-15));
    CHECK(f.mean_reliability == doctest::Approx(s / 8.0).epsilon(1e-15));

    // noiseless limit: hard decisions reproduce the codeword
    auto rng2 = channel::FrameRng(43);
    channel::ReceivedFrame quiet = channel::transmit(cw, 1e-12, rng2);
    CHECK(quiet.z == cw);
    for (double l : quiet.llr) CHECK(std::abs(l) > 1e9);

    CHECK_THROWS_AS(channel::transmit(cw, 0.0, rng), std::invalid_argument);
}

TEST_CASE("law of large numbers on the all-zero codeword") {
    // mean of y over many transmissions of c=0 is +1
    const std::size_t n = 32;
    gf2::BitVec zero(n);
    const double sigma2 = 1.0;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::uint64_t f = 0; f < 4000; ++f) {
        auto rng = channel::FrameRng::for_frame(123, 0, f);
        channel::ReceivedFrame fr = channel::transmit(zero, sigma2, rng);
        for (double y : fr.y) sum += y;
        count += n;
    }
    const double mean = sum / double(count);
    const double tol = 3.0 * std::sqrt(sigma2) / std::sqrt(double(count));
    CHECK(std::abs(mean - 1.0) < tol);
}

TEST_CASE("per-frame streams are deterministic and distinct") {
    auto a1 = channel::FrameRng::for_frame(9, 2, 17);
    auto a2 = channel::FrameRng::for_frame(9, 2, 17);
    auto b = channel::FrameRng::for_frame(9, 2, 18);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 64; ++i) {
        const auto x = a1.next_u64();
        all_equal = all_equal && (x == a2.next_u64());
        any_diff = any_diff || (x != b.next_u64());
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("polar gaussian moments") {
    auto rng = channel::FrameRng(777);
    double sum = 0.0, sum2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double g = rng.next_gaussian();
        sum += g;
        sum2 += g * g;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sum2 / n - 1.0) < 0.02);
}

TEST_CASE("soft weight definition and properties") {
    auto code = gf2::build_rm(1, 3);
    auto rng = channel::FrameRng(5);
    gf2::BitVec cw = gf2::encode(code, rng.random_bits(4));
    channel::ReceivedFrame f = channel::transmit(cw, 1.0, rng);

    CHECK(channel::soft_weight(f.llr, f.z, f.z) == 0.0);
    gf2::BitVec comp = f.z;
    for (std::size_t i = 0; i < comp.size(); ++i) comp.flip(i);
    CHECK(channel::soft_weight(f.llr, comp, f.z) ==
          doctest::Approx(f.total_soft_weight).epsilon(1e-12));

    // random candidates: naive oracle agreement and the complement partition
    for (int trial = 0; trial < 100; ++trial) {
        gf2::BitVec v = rng.random_bits(8);
        const double g = channel::soft_weight(f.llr, v, f.z);
        CHECK(g == oracles::naive_soft_weight(f.llr, v, f.z));
        gf2::BitVec nv = v;
        for (std::size_t i = 0; i < nv.size(); ++i) nv.flip(i);
        CHECK(g + channel::soft_weight(f.llr, nv, f.z) ==
              doctest::Approx(f.total_soft_weight).epsilon(1e-12));
    }

    // unconstrained minimum over every binary vector sits at v = z
    for (std::uint32_t pat = 0; pat < 256; ++pat) {
        gf2::BitVec v(8);
        for (int b = 0; b < 8; ++b)
            if ((pat >> b) & 1) v.set(std::size_t(b), true);
        if (v == f.z) continue;
        CHECK(channel::soft_weight(f.llr, v, f.z) > 0.0);
    }

    // positive scaling scales the metric and keeps the argmin
    std::vector<double> scaled(f.llr);
    for (double& l : scaled) l *= 4.25;
    gf2::BitVec best_orig, best_scaled;
    double bo = 1e300, bs = 1e300;
    for (const auto& cand : oracles::codebook(code)) {
        const double a = channel::soft_weight(f.llr, cand, f.z);
        const double b = channel::soft_weight(scaled, cand, f.z);
        CHECK(b == doctest::Approx(4.25 * a).epsilon(1e-12));
        if (a < bo) {
            bo = a;
            best_orig = cand;
        }
        if (b < bs) {
            bs = b;
            best_scaled = cand;
        }
    }
    CHECK(best_orig == best_scaled);

    gf2::BitVec wrong(7);
    CHECK_THROWS_AS(channel::soft_weight(f.llr, wrong, f.z), std::invalid_argument);
}
