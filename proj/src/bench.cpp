#include "bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "parallel.hpp"

namespace lcnes::bench {

Policy parse_policy(const std::string& name) {
    if (name == "full" || name == "full_budget") return Policy::full_budget;
    if (name == "optimal" || name == "optimal_stop") return Policy::optimal_stop;
    if (name == "stall" || name == "fixed_stall") return Policy::fixed_stall;
    if (name == "genie") return Policy::genie;
    if (name == "nes") return Policy::nes;
    throw std::invalid_argument("unknown policy: " + name +
                                " (expected full|optimal|stall|genie|nes)");
}

const char* policy_name(Policy p) {
    switch (p) {
        case Policy::full_budget: return "full_budget";
        case Policy::optimal_stop: return "optimal_stop";
        case Policy::fixed_stall: return "fixed_stall";
        case Policy::genie: return "genie";
        case Policy::nes: return "nes";
    }
    return "?";
}

namespace {

struct FrameOutcome {
    bool error = false;
    std::uint32_t teps = 0;
};

FrameOutcome decode_frame(const BenchConfig& cfg, const nes::CheckpointGrid* grid,
                          const lcosd::LcosdContext& ctx, const channel::ReceivedFrame& frame,
                          const gf2::BitVec& transmitted) {
    FrameOutcome out;
    switch (cfg.policy) {
        case Policy::full_budget: {
            const lcosd::SearchState st = lcosd::decode_full(ctx, cfg.t_max);
            out.error = st.best_candidate != transmitted;
            out.teps = std::uint32_t(st.teps);
            return out;
        }
        case Policy::optimal_stop: {
            const lcosd::SearchState st = lcosd::decode_optimal_stop(ctx, cfg.t_max);
            out.error = st.best_candidate != transmitted;
            out.teps = std::uint32_t(st.teps);
            return out;
        }
        case Policy::nes: {
            const nes::NesDecodeResult r =
                nes::nes_decode(ctx, frame, {cfg.model, cfg.lambda, *grid}, cfg.t_max);
            out.error = r.codeword != transmitted;
            out.teps = std::uint32_t(r.teps_used);
            return out;
        }
        case Policy::fixed_stall:
        case Policy::genie:
            break;
    }

    // hand-rolled loops sharing the running-best bookkeeping
    lcosd::TepStream stream(ctx);
    const gf2::BitVec e_star = lcosd::transmitted_e_r(ctx, transmitted);
    gf2::BitVec best_e_r;
    double best_gamma = lcosd::kInf;
    std::uint64_t stall = 0;
    std::uint64_t teps = 0;
    lcosd::TepEvent ev;
    for (std::uint64_t t = 1; t <= cfg.t_max; ++t) {
        if (!stream.next(ev)) break;
        teps = t;
        if (ev.gamma < best_gamma) {
            best_gamma = ev.gamma;
            best_e_r = ev.e_r;
            stall = 0;
        } else {
            ++stall;
        }
        if (cfg.policy == Policy::genie && best_e_r == e_star) break;
        if (cfg.policy == Policy::fixed_stall && stall >= cfg.stall_budget) break;
    }
    out.error = best_e_r != e_star;
    out.teps = std::uint32_t(teps);
    return out;
}

PointStats summarize(double snr_db, std::span<const std::uint8_t> err,
                     std::span<const std::uint32_t> teps, double wall_s) {
    PointStats p;
    p.snr_db = snr_db;
    p.frames = err.size();
    for (std::uint8_t e : err) p.frame_errors += e;
    p.fer = double(p.frame_errors) / double(p.frames);
    p.fer_ci95 = wilson_half_width_95(p.frame_errors, p.frames);
    std::uint64_t sum = 0;
    for (std::uint32_t t : teps) sum += t;
    p.avg_tep = double(sum) / double(p.frames);
    std::vector<std::uint32_t> sorted(teps.begin(), teps.end());
    std::sort(sorted.begin(), sorted.end());
    auto rank = [&](double q) {  // nearest-rank percentile
        const std::size_t r = std::size_t(std::ceil(q * double(sorted.size())));
        return sorted[std::max<std::size_t>(r, 1) - 1];
    };
    p.tep_p50 = rank(0.50);
    p.tep_p95 = rank(0.95);
    p.tep_max = sorted.back();
    p.wall_s = wall_s;
    return p;
}

}  // namespace

BenchResult run(const BenchConfig& cfg) {
    if (!cfg.code) throw std::invalid_argument("bench: no code");
    if (cfg.snr_db.empty()) throw std::invalid_argument("bench: empty snr list");
    if (cfg.frames < 1) throw std::invalid_argument("bench: frames must be >= 1");
    if (cfg.t_max < 1) throw std::invalid_argument("bench: t_max must be >= 1");
    if (cfg.policy == Policy::nes && (!cfg.model || cfg.model->empty()))
        throw std::invalid_argument("bench: nes policy requires a model");

    const gf2::LinearCode& code = *cfg.code;
    nes::CheckpointGrid grid;
    if (cfg.policy == Policy::nes) grid = nes::make_grid(cfg.t_max);

    BenchResult res;
    res.policy = cfg.policy;
    res.lambda = cfg.lambda;
    for (std::size_t snr_idx = 0; snr_idx < cfg.snr_db.size(); ++snr_idx) {
        const double snr_db = cfg.snr_db[snr_idx];
        const double sigma2 = channel::ebn0_to_sigma2(snr_db, code.rate());
        std::vector<std::uint8_t> err(cfg.frames, 0);
        std::vector<std::uint32_t> teps(cfg.frames, 0);
        const auto t0 = std::chrono::steady_clock::now();
        util::parallel_for(0, cfg.frames, cfg.workers, [&](std::uint64_t f) {
            auto rng = channel::FrameRng::for_frame(cfg.seed, snr_idx, f);
            const gf2::BitVec msg = rng.random_bits(std::size_t(code.k));
            const gf2::BitVec cw = gf2::encode(code, msg);
            const channel::ReceivedFrame frame = channel::transmit(cw, sigma2, rng);
            const lcosd::LcosdContext ctx = lcosd::preprocess(code, frame, cfg.delta);
            const FrameOutcome o = decode_frame(cfg, &grid, ctx, frame, cw);
            err[f] = o.error ? 1 : 0;
            teps[f] = o.teps;
        });
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        res.points.push_back(summarize(snr_db, err, teps, wall));
    }
    return res;
}

std::vector<BenchResult> sweep_lambda(const BenchConfig& cfg, std::span<const double> lambdas) {
    if (lambdas.empty()) throw std::invalid_argument("sweep_lambda: empty lambda list");
    std::vector<BenchResult> out;
    for (double l : lambdas) {
        BenchConfig c = cfg;
        c.lambda = l;
        out.push_back(run(c));
    }
    return out;
}

double wilson_half_width_95(std::uint64_t errors, std::uint64_t frames) {
    if (frames == 0) return 0.0;
    constexpr double z = 1.959963984540054;
    const double n = double(frames);
    const double p = double(errors) / n;
    const double z2 = z * z;
    return (z / (1.0 + z2 / n)) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
}

void write_csv(std::ostream& out, const std::string& code_id,
               std::span<const BenchResult> results) {
    out << "code,policy,lambda,snr_db,frames,frame_errors,fer,fer_ci95,avg_tep,tep_p95,wall_s\n";
    char buf[64];
    for (const BenchResult& r : results) {
        for (const PointStats& p : r.points) {
            out << code_id << ',' << policy_name(r.policy) << ',';
            if (r.policy == Policy::nes) {
                std::snprintf(buf, sizeof buf, "%.10g", r.lambda);
                out << buf;
            }
            std::snprintf(buf, sizeof buf, "%.10g", p.snr_db);
            out << ',' << buf << ',' << p.frames << ',' << p.frame_errors;
            std::snprintf(buf, sizeof buf, "%.10g", p.fer);
            out << ',' << buf;
            std::snprintf(buf, sizeof buf, "%.6g", p.fer_ci95);
            out << ',' << buf;
            std::snprintf(buf, sizeof buf, "%.10g", p.avg_tep);
            out << ',' << buf << ',' << p.tep_p95;
            std::snprintf(buf, sizeof buf, "%.3f", p.wall_s);
            out << ',' << buf << '\n';
        }
    }
    if (!out) throw std::runtime_error("bench csv: write failed");
}

}  // namespace lcnes::bench
