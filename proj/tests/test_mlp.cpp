#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <random>

#include "oracles.hpp"
#include "train.hpp"

using namespace lcnes;

namespace {

// plain-loop reference forward pass, no Eigen
double naive_forward(const nes::MlpModel& m, const std::array<double, 16>& x) {
    std::vector<double> a(x.begin(), x.end());
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        const auto& w = m.weights[l];
        std::vector<double> z(std::size_t(w.cols()), 0.0);
        for (std::size_t c = 0; c < std::size_t(w.cols()); ++c) {
            double acc = m.biases[l](Eigen::Index(c));
            for (std::size_t r = 0; r < std::size_t(w.rows()); ++r)
                acc += a[r] * w(Eigen::Index(r), Eigen::Index(c));
            z[c] = acc;
        }
        if (l + 1 == m.weights.size()) return z[0];
        for (double& v : z) v = v > 0.0 ? v : 0.0;
        a = std::move(z);
    }
    return 0.0;
}

nes::Dataset synthetic_dataset(std::uint64_t seed, int frames, int max_j) {
    std::mt19937_64 rng(seed);
    nes::Dataset ds;
    ds.code_id = "synthetic";
    for (int f = 0; f < frames; ++f) {
        const int J = 1 + int(rng() % std::uint64_t(max_j));
        for (int j = 1; j <= J; ++j) {
            nes::CheckpointSample s;
            s.frame_id = std::uint64_t(f);
            s.snr_db = 1.0;
            s.j = std::uint32_t(j);
            s.t_j = std::uint64_t(j);
            for (double& v : s.features) v = double(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
            s.y = int(rng() & 1);
            s.residual = rng() % 128;
            s.total_teps = 128;
            ds.rows.push_back(s);
        }
    }
    return ds;
}

}  // namespace

TEST_CASE("zero model outputs a zero logit") {
    nes::MlpModel m = nes::mlp_init(std::uint64_t(4));
    for (auto& w : m.weights) w.setZero();
    for (auto& b : m.biases) b.setZero();
    std::array<double, 16> x{};
    x.fill(0.3);
    CHECK(nes::mlp_forward(m, x, false, nullptr) == 0.0);
    CHECK(nes::sigmoid(0.0) == 0.5);
}

TEST_CASE("evaluation mode is deterministic and matches the naive reference") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        nes::MlpModel m = nes::mlp_init(rng());
        std::array<double, 16> x{};
        for (double& v : x) v = double(rng() >> 11) * 0x1.0p-53 * 4.0 - 2.0;
        const double o1 = nes::mlp_forward(m, x, false, nullptr);
        const double o2 = nes::mlp_forward(m, x, false, nullptr);
        CHECK(o1 == o2);
        CHECK(o1 == doctest::Approx(naive_forward(m, x)).epsilon(1e-12));
    }
    nes::MlpModel m = nes::mlp_init(std::uint64_t(5));
    std::array<double, 16> bad{};
    bad[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(nes::mlp_forward(m, bad, false, nullptr), std::invalid_argument);
    CHECK_THROWS_AS(nes::mlp_forward(m, bad, true, nullptr), std::invalid_argument);
}

TEST_CASE("dropout scales survivors and only fires in training mode") {
    nes::MlpModel m = nes::mlp_init(std::uint64_t(20));
    std::array<double, 16> x{};
    x.fill(1.0);
    std::mt19937_64 rng(7);
    // training outputs vary across draws, evaluation does not
    const double t1 = nes::mlp_forward(m, x, true, &rng);
    const double t2 = nes::mlp_forward(m, x, true, &rng);
    bool differs = t1 != t2;
    for (int i = 0; i < 8 && !differs; ++i)
        differs = nes::mlp_forward(m, x, true, &rng) != t1;
    CHECK(differs);
    // expectation over many draws approximates the eval output (inverted dropout)
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) sum += nes::mlp_forward(m, x, true, &rng);
    const double eval = nes::mlp_forward(m, x, false, nullptr);
    CHECK(sum / n == doctest::Approx(eval).epsilon(0.05));
}

TEST_CASE("model file round trip preserves evaluation exactly") {
    nes::MlpModel m = nes::mlp_init(std::uint64_t(31));
    nes::save_model(m, "nes_model_rt.txt");
    nes::MlpModel back = nes::load_model("nes_model_rt.txt");
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::array<double, 16> x{};
        for (double& v : x) v = double(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
        CHECK(nes::mlp_forward(m, x, false, nullptr) == nes::mlp_forward(back, x, false, nullptr));
    }
    std::remove("nes_model_rt.txt");
    CHECK_THROWS_AS(nes::load_model("missing_model.txt"), std::runtime_error);
}

TEST_CASE("loss hits its closed-form corner values") {
    nes::TrainConfig cfg;
    cfg.kappa = 128.0;
    nes::MlpModel m = nes::mlp_init(std::uint64_t(2));
    for (auto& w : m.weights) w.setZero();
    for (auto& b : m.biases) b.setZero();

    // one frame, three samples, y = 0, r = kappa, o = 0 -> main = ln 2 per sample
    nes::Batch batch;
    batch.features = Eigen::MatrixXd::Zero(3, 16);
    batch.y = Eigen::VectorXd::Zero(3);
    batch.residual = Eigen::VectorXd::Constant(3, cfg.kappa);
    batch.frame_offsets = {0, 3};
    double main_part = 0.0, mono_part = 0.0;
    const double loss = nes::loss_batch(m, batch, cfg, false, nullptr, nullptr, &main_part, &mono_part);
    CHECK(main_part == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(mono_part == 0.0);  // constant p sequence is non-increasing
    CHECK(loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // y = 1 with a strongly positive logit: main loss tends to zero
    m.biases.back()(0) = 40.0;
    batch.y = Eigen::VectorXd::Constant(3, 1.0);
    const double l2 = nes::loss_batch(m, batch, cfg, false, nullptr, nullptr, &main_part, &mono_part);
    CHECK(l2 < 1e-12);
}

TEST_CASE("monotonicity penalty is zero exactly for non-increasing p") {
    nes::TrainConfig cfg;
    nes::MlpModel m = nes::mlp_init(std::uint64_t(8));
    const nes::Dataset ds = synthetic_dataset(99, 6, 5);
    const nes::FrameIndex idx = nes::index_frames(ds);
    std::vector<std::size_t> all(idx.spans.size());
    std::iota(all.begin(), all.end(), 0);
    nes::Batch batch = nes::make_batch(ds, idx, all);

    double mono = 0.0;
    nes::loss_batch(m, batch, cfg, false, nullptr, nullptr, nullptr, &mono);
    // recompute directly from the logits
    Eigen::VectorXd o(batch.features.rows());
    for (Eigen::Index i = 0; i < o.size(); ++i) {
        std::array<double, 16> x{};
        for (int c = 0; c < 16; ++c) x[std::size_t(c)] = batch.features(i, c);
        o(i) = nes::mlp_forward(m, x, false, nullptr);
    }
    double expect = 0.0;
    int frames = int(batch.frame_offsets.size()) - 1;
    for (int f = 0; f < frames; ++f) {
        const int lo = batch.frame_offsets[std::size_t(f)], hi = batch.frame_offsets[std::size_t(f) + 1];
        if (hi - lo < 2) continue;
        double fm = 0.0;
        for (int i = lo; i + 1 < hi; ++i)
            fm += std::max(0.0, nes::sigmoid(o(i + 1)) - nes::sigmoid(o(i)));
        expect += fm / double(hi - lo - 1);
    }
    expect /= double(frames);
    CHECK(mono == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central finite differences") {
    nes::TrainConfig cfg;
    cfg.kappa = 128.0;
    nes::MlpModel m = nes::mlp_init(std::uint64_t(17));
    const nes::Dataset ds = synthetic_dataset(5, 8, 6);
    const nes::FrameIndex idx = nes::index_frames(ds);
    std::vector<std::size_t> all(idx.spans.size());
    std::iota(all.begin(), all.end(), 0);
    nes::Batch batch = nes::make_batch(ds, idx, all);
    std::vector<std::array<double, 16>> rows;
    for (const auto& r : ds.rows) rows.push_back(r.features);

    nes::Gradients g;
    nes::loss_batch(m, batch, cfg, false, nullptr, &g);

    std::mt19937_64 rng(55);
    const double h = 1e-4;
    double max_rel = 0.0;
    int checked = 0;
    for (int attempt = 0; attempt < 500 && checked < 60; ++attempt) {
        const std::size_t l = rng() % m.weights.size();
        const bool is_bias = (rng() & 1) != 0;
        double* param;
        double analytic;
        if (is_bias) {
            const Eigen::Index i = Eigen::Index(rng() % std::uint64_t(m.biases[l].size()));
            param = &m.biases[l](i);
            analytic = g.db[l](i);
        } else {
            const Eigen::Index r = Eigen::Index(rng() % std::uint64_t(m.weights[l].rows()));
            const Eigen::Index c = Eigen::Index(rng() % std::uint64_t(m.weights[l].cols()));
            param = &m.weights[l](r, c);
            analytic = g.dw[l](r, c);
        }
        const double save = *param;
        // central differences only see the true derivative while the
        // rectifier activation pattern is stable across the probe interval
        *param = save + h;
        const auto pat_plus = oracles::activation_pattern(m, rows);
        const double lp = nes::loss_batch(m, batch, cfg, false, nullptr, nullptr);
        *param = save - h;
        const auto pat_minus = oracles::activation_pattern(m, rows);
        const double lm = nes::loss_batch(m, batch, cfg, false, nullptr, nullptr);
        *param = save;
        if (pat_plus != pat_minus) continue;  // probe straddles a kink
        ++checked;
        const double numeric = (lp - lm) / (2.0 * h);
        const double rel = std::abs(analytic - numeric) /
                           std::max({std::abs(analytic), std::abs(numeric), 1e-8});
        max_rel = std::max(max_rel, rel);
    }
    CHECK(checked >= 50);
    CHECK(max_rel < 1e-4);
}

TEST_CASE("a single separable y=1 sample is learned within 200 steps") {
    nes::Dataset ds;
    ds.code_id = "one";
    nes::CheckpointSample s;
    s.frame_id = 0;
    s.j = 1;
    s.t_j = 1;
    for (std::size_t i = 0; i < 16; ++i) s.features[i] = 0.1 * double(i) - 0.5;
    s.y = 1;
    s.residual = 10;
    s.total_teps = 16;
    ds.rows.push_back(s);

    nes::TrainConfig cfg;
    cfg.steps = 200;
    cfg.beta = 0.0;
    cfg.kappa = 16.0;
    cfg.seed = 12;
    auto res = nes::train(ds, cfg);
    const double p = nes::sigmoid(nes::mlp_forward(res.model, s.features, false, nullptr));
    CHECK(p > 0.99);
    CHECK(res.loss_curve.size() == 200);
}

TEST_CASE("training is bitwise deterministic given the seed") {
    const nes::Dataset ds = synthetic_dataset(7, 20, 4);
    nes::TrainConfig cfg;
    cfg.steps = 50;
    cfg.batch_frames = 8;
    cfg.seed = 77;
    auto a = nes::train(ds, cfg);
    auto b = nes::train(ds, cfg);
    REQUIRE(a.loss_curve.size() == b.loss_curve.size());
    for (std::size_t i = 0; i < a.loss_curve.size(); ++i)
        CHECK(a.loss_curve[i] == b.loss_curve[i]);
    for (std::size_t l = 0; l < a.model.weights.size(); ++l)
        CHECK(a.model.weights[l] == b.model.weights[l]);

    // zero steps keeps the initialization
    cfg.steps = 0;
    auto init = nes::train(ds, cfg);
    std::mt19937_64 seed_rng(cfg.seed);
    auto fresh = nes::mlp_init(seed_rng);
    for (std::size_t l = 0; l < init.model.weights.size(); ++l)
        CHECK(init.model.weights[l] == fresh.weights[l]);

    nes::Dataset empty;
    CHECK_THROWS_AS(nes::train(empty, cfg), std::invalid_argument);
}
