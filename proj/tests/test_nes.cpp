#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "nes.hpp"
#include "oracles.hpp"

using namespace lcnes;

namespace {

// the spacing recurrence, written out independently
std::vector<std::uint64_t> grid_recurrence(std::uint64_t t_max) {
    std::vector<std::uint64_t> pts{1};
    while (pts.back() < t_max) {
        const double next = double(pts.back()) * std::sqrt(2.0);
        std::uint64_t nxt = std::uint64_t(std::llround(next));
        if (nxt <= pts.back()) nxt = pts.back() + 1;
        if (nxt >= t_max) {
            pts.push_back(t_max);
            break;
        }
        pts.push_back(nxt);
    }
    return pts;
}

nes::MlpModel constant_logit_model(double bias) {
    nes::MlpModel m = nes::mlp_init(std::uint64_t(99));
    for (auto& w : m.weights) w.setZero();
    for (auto& b : m.biases) b.setZero();
    m.biases.back()(0) = bias;
    return m;
}

}  // namespace

TEST_CASE("checkpoint grid spacing") {
    auto g1 = nes::make_grid(1);
    CHECK(g1.points == std::vector<std::uint64_t>{1});
    CHECK(g1.gap(1) == 0);

    auto g16 = nes::make_grid(16);
    CHECK(g16.points == std::vector<std::uint64_t>{1, 2, 3, 4, 6, 8, 11, 16});
    CHECK(g16.gap(1) == 1);
    CHECK(g16.gap(7) == 5);
    CHECK(g16.gap(8) == 0);  // t_{J+1} = t_max

    auto g14 = nes::make_grid(std::uint64_t(1) << 14);
    CHECK(g14.points.front() == 1);
    CHECK(g14.points.back() == 16384);
    CHECK(g14.points == grid_recurrence(std::uint64_t(1) << 14));
    CHECK(g14.size() >= 25);
    CHECK(g14.size() <= 31);
    for (std::size_t i = 1; i < g14.points.size(); ++i)
        CHECK(g14.points[i] > g14.points[i - 1]);
}

TEST_CASE("features match an independent naive extractor") {
    auto code = gf2::build_rm(1, 3);
    auto grid = nes::make_grid(16);
    for (std::uint64_t s = 0; s < 200; ++s) {
        auto tf = oracles::random_frame(code, 1.0, 100 + s);
        auto ctx = lcosd::preprocess(code, tf.frame, 2);
        lcosd::Trace trace;
        lcosd::decode_full(ctx, 16, &trace, &tf.codeword);
        for (std::size_t j = 1; j <= grid.size(); ++j) {
            const auto got = nes::extract_features(tf.frame, ctx, trace, grid, j);
            const auto want = oracles::naive_features(tf.frame, ctx, trace, grid, j);
            for (int i = 0; i < 16; ++i) {
                CHECK(std::isfinite(got[std::size_t(i)]));
                CHECK(got[std::size_t(i)] ==
                      doctest::Approx(want[std::size_t(i)]).epsilon(1e-9));
            }
            CHECK(got[0] >= 0.0);
            CHECK(got[0] <= 1.0);
            CHECK(got[14] >= 0.0);
            CHECK(got[14] <= 1.0);
            if (j == 1) {
                CHECK(got[0] == 0.0);   // log2(1) = 0
                CHECK(got[12] == 0.0);  // no previous checkpoint
                CHECK(got[13] == 0.0);
            }
        }
        CHECK_THROWS_AS(nes::extract_features(tf.frame, ctx, trace, grid, grid.size() + 1),
                        std::invalid_argument);
    }
}

TEST_CASE("features are invariant to positive llr scaling") {
    auto code = gf2::build_rm(1, 3);
    auto grid = nes::make_grid(16);
    for (std::uint64_t s = 0; s < 100; ++s) {
        auto tf = oracles::random_frame(code, 1.0, 300 + s);
        channel::ReceivedFrame scaled = tf.frame;
        for (double& l : scaled.llr) l *= 7.3;
        scaled.total_soft_weight *= 7.3;
        scaled.mean_reliability *= 7.3;

        auto ctx_a = lcosd::preprocess(code, tf.frame, 2);
        auto ctx_b = lcosd::preprocess(code, scaled, 2);
        lcosd::Trace tr_a, tr_b;
        lcosd::decode_full(ctx_a, 16, &tr_a);
        lcosd::decode_full(ctx_b, 16, &tr_b);
        REQUIRE(tr_a.size() == tr_b.size());
        for (std::size_t j = 1; j <= grid.size(); ++j) {
            const auto fa = nes::extract_features(tf.frame, ctx_a, tr_a, grid, j);
            const auto fb = nes::extract_features(scaled, ctx_b, tr_b, grid, j);
            for (int i = 0; i < 16; ++i) {
                const double denom = std::max(std::abs(fa[std::size_t(i)]), 1e-30);
                CHECK(std::abs(fa[std::size_t(i)] - fb[std::size_t(i)]) / denom <= 1e-9);
            }
        }
    }
}

TEST_CASE("continuation labels follow the definition") {
    auto grid = nes::make_grid(16);
    const nes::CheckpointGrid custom{{1, 2, 4, 8, 16}, 16};

    // synthetic trace: correct codeword first found at t = 10, final correct
    lcosd::Trace trace;
    for (std::uint64_t t = 1; t <= 16; ++t) {
        lcosd::TraceEntry e;
        e.gamma_r = double(t);
        e.gamma = 20.0 - double(t);
        e.improved = true;
        e.best_correct = t >= 10;
        trace.push_back(e);
    }
    auto labels = nes::label_checkpoints(trace, custom);
    CHECK(labels.total_teps == 16);
    CHECK(labels.y == std::vector<int>{1, 1, 1, 1, 0});
    CHECK(labels.residual == std::vector<std::uint64_t>{15, 14, 12, 8, 0});

    // full-budget result wrong: labels all zero
    for (auto& e : trace) e.best_correct = false;
    CHECK(nes::label_checkpoints(trace, custom).y == std::vector<int>{0, 0, 0, 0, 0});

    // correct from the very first TEP onward: labels all zero
    for (auto& e : trace) e.best_correct = true;
    CHECK(nes::label_checkpoints(trace, custom).y == std::vector<int>{0, 0, 0, 0, 0});

    // a trace shorter than the grid only labels reached checkpoints
    trace.resize(5);
    auto part = nes::label_checkpoints(trace, custom);
    CHECK(part.reached == 3);
    CHECK(part.total_teps == 5);
}

TEST_CASE("label consistency against a replay of real decodes") {
    auto code = gf2::build_rm(1, 3);
    auto grid = nes::make_grid(16);
    const auto book = oracles::codebook(code);
    for (std::uint64_t s = 0; s < 200; ++s) {
        auto tf = oracles::random_frame(code, 0.9, 700 + s);
        auto ctx = lcosd::preprocess(code, tf.frame, 2);
        lcosd::Trace trace;
        auto st = lcosd::decode_full(ctx, 16, &trace, &tf.codeword);
        auto labels = nes::label_checkpoints(trace, grid);
        const bool final_correct = st.best_candidate == tf.codeword;
        // replay: recompute the running best by hand at each checkpoint
        for (std::size_t j = 0; j < labels.reached; ++j) {
            const std::uint64_t tj = grid.points[j];
            double best = lcosd::kInf;
            std::uint64_t best_t = 0;
            for (std::uint64_t t = 1; t <= tj; ++t)
                if (trace[t - 1].gamma < best) {
                    best = trace[t - 1].gamma;
                    best_t = t;
                }
            (void)best_t;
            const bool cp_correct = trace[tj - 1].best_correct;
            CHECK(labels.y[j] == (final_correct && !cp_correct ? 1 : 0));
            if (labels.y[j] == 1) CHECK(final_correct);  // y=1 never without final success
        }
    }
}

TEST_CASE("dataset generation is deterministic and well ordered") {
    auto code = gf2::build_rm(1, 3);
    auto grid = nes::make_grid(16);
    const double snrs[] = {0.0, 2.0};
    auto ds1 = nes::gen_dataset(code, snrs, 40, 2, 16, grid, 9, 2);
    auto ds2 = nes::gen_dataset(code, snrs, 40, 2, 16, grid, 9, 1);
    REQUIRE(ds1.rows.size() == ds2.rows.size());
    for (std::size_t i = 0; i < ds1.rows.size(); ++i) {
        CHECK(ds1.rows[i].frame_id == ds2.rows[i].frame_id);
        CHECK(ds1.rows[i].features == ds2.rows[i].features);
        CHECK(ds1.rows[i].y == ds2.rows[i].y);
    }
    // ordering by (frame_id, j) and row invariants
    for (std::size_t i = 1; i < ds1.rows.size(); ++i) {
        const auto& a = ds1.rows[i - 1];
        const auto& b = ds1.rows[i];
        CHECK((b.frame_id > a.frame_id || (b.frame_id == a.frame_id && b.j == a.j + 1)));
    }
    for (const auto& r : ds1.rows) {
        CHECK((r.y == 0 || r.y == 1));
        CHECK(r.residual == r.total_teps - r.t_j);
        CHECK(r.t_j <= r.total_teps);
    }

    // near-noiseless generation: the decoder is right from t=1, labels vanish
    const double quiet[] = {20.0};
    auto qds = nes::gen_dataset(code, quiet, 30, 2, 16, grid, 3, 1);
    for (const auto& r : qds.rows) CHECK(r.y == 0);
}

TEST_CASE("dataset csv round trip is byte stable") {
    auto code = gf2::build_rm(1, 3);
    auto grid = nes::make_grid(16);
    const double snrs[] = {1.0};
    auto ds = nes::gen_dataset(code, snrs, 25, 2, 16, grid, 21, 1);
    nes::write_dataset_csv(ds, "nes_ds_a.csv");
    auto loaded = nes::load_dataset_csv("nes_ds_a.csv");
    CHECK(loaded.code_id == ds.code_id);
    REQUIRE(loaded.rows.size() == ds.rows.size());
    nes::write_dataset_csv(loaded, "nes_ds_b.csv");
    std::ifstream a("nes_ds_a.csv"), b("nes_ds_b.csv");
    std::string sa((std::istreambuf_iterator<char>(a)), {});
    std::string sb((std::istreambuf_iterator<char>(b)), {});
    CHECK(sa == sb);
    std::remove("nes_ds_a.csv");
    std::remove("nes_ds_b.csv");

    CHECK_THROWS_AS(nes::load_dataset_csv("does_not_exist.csv"), std::runtime_error);
}

TEST_CASE("nes decode follows the stopping rule at the boundaries") {
    auto code = gf2::build_rm(1, 3);
    auto grid = nes::make_grid(16);

    // p ~ 0: stop at the very first checkpoint with the first candidate
    auto low = constant_logit_model(-12.0);
    // p ~ 1: the rule p <= Delta_j / lambda can only fire with lambda beyond
    // 1/p; a lambda above every Delta_j / p keeps the search running
    auto high = constant_logit_model(+12.0);
    std::uint64_t max_gap = 0;
    for (std::size_t j = 1; j < grid.size(); ++j) max_gap = std::max(max_gap, grid.gap(j));

    for (std::uint64_t s = 0; s < 100; ++s) {
        auto tf = oracles::random_frame(code, 1.0, 900 + s);
        auto ctx = lcosd::preprocess(code, tf.frame, 2);

        auto r_low = nes::nes_decode(ctx, tf.frame, {&low, 1024.0, grid}, 16);
        CHECK(r_low.teps_used == 1);
        CHECK(r_low.stopped_early);
        auto first = lcosd::decode_full(ctx, 1);
        CHECK(r_low.codeword == first.best_candidate);

        auto r_high = nes::nes_decode(ctx, tf.frame, {&high, double(2 * max_gap), grid}, 16);
        CHECK(!r_high.stopped_early);
        auto full = lcosd::decode_full(ctx, 16);
        CHECK(r_high.codeword == full.best_candidate);
        CHECK(r_high.teps_used == full.teps);

        // a tiny error penalty makes stopping immediately the rational move
        // even when continuation is predicted to help
        auto r_cheap = nes::nes_decode(ctx, tf.frame, {&high, 0.5, grid}, 16);
        CHECK(r_cheap.teps_used == 1);
        CHECK(r_cheap.stopped_early);
    }
}

TEST_CASE("stopping time is monotone in lambda per frame") {
    auto code = gf2::build_rm(1, 3);
    auto grid = nes::make_grid(16);
    auto model = nes::mlp_init(std::uint64_t(123));
    const double lambdas[] = {0.5, 2.0, 8.0, 32.0, 128.0, 1024.0};
    for (std::uint64_t s = 0; s < 100; ++s) {
        auto tf = oracles::random_frame(code, 1.0, 1500 + s);
        auto ctx = lcosd::preprocess(code, tf.frame, 2);
        std::uint64_t prev = 0;
        for (double l : lambdas) {
            auto r = nes::nes_decode(ctx, tf.frame, {&model, l, grid}, 16);
            CHECK(r.teps_used >= prev);
            CHECK(r.teps_used <= 16);
            prev = r.teps_used;
        }
    }
}

TEST_CASE("nes decode validates its inputs") {
    auto code = gf2::build_rm(1, 3);
    auto grid = nes::make_grid(16);
    auto model = nes::mlp_init(std::uint64_t(1));
    auto tf = oracles::random_frame(code, 1.0, 2);
    auto ctx = lcosd::preprocess(code, tf.frame, 2);
    CHECK_THROWS_AS(nes::nes_decode(ctx, tf.frame, {nullptr, 1.0, grid}, 16),
                    std::invalid_argument);
    CHECK_THROWS_AS(nes::nes_decode(ctx, tf.frame, {&model, 0.0, grid}, 16),
                    std::invalid_argument);
    CHECK_THROWS_AS(nes::nes_decode(ctx, tf.frame, {&model, 1.0, grid}, 8),  // grid mismatch
                    std::invalid_argument);
}
