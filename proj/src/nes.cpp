#include "nes.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "parallel.hpp"

namespace lcnes::nes {

CheckpointGrid make_grid(std::uint64_t t_max) {
    if (t_max < 1) throw std::invalid_argument("make_grid: t_max must be >= 1");
    CheckpointGrid grid;
    grid.t_max = t_max;
    grid.points.push_back(1);
    while (grid.points.back() < t_max) {
        const std::uint64_t last = grid.points.back();
        const auto next = std::uint64_t(
            std::max<double>(double(last) + 1.0, std::llround(double(last) * std::sqrt(2.0))));
        if (next >= t_max) {
            grid.points.push_back(t_max);
            break;
        }
        grid.points.push_back(next);
    }
    return grid;
}

namespace {

struct SetStats {
    double mean = 0.0, sd = 0.0, min = 0.0;
};

SetStats stats_of(std::span<const double> w) {
    SetStats s;
    if (w.empty()) return s;
    double sum = 0.0, mn = w[0];
    for (double x : w) {
        sum += x;
        mn = std::min(mn, x);
    }
    s.mean = sum / double(w.size());
    double var = 0.0;
    for (double x : w) var += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(var / double(w.size()));  // population convention
    s.min = mn;
    return s;
}

// running-best metric and the time of its most recent strict improvement,
// scanning the first t entries of the trace
void running_best(std::span<const lcosd::TraceEntry> trace, std::uint64_t t, double* best,
                  std::uint64_t* last_improve) {
    double b = lcosd::kInf;
    std::uint64_t li = 0;
    for (std::uint64_t i = 0; i < t; ++i) {
        if (trace[i].gamma < b) {
            b = trace[i].gamma;
            li = i + 1;
        }
    }
    *best = b;
    *last_improve = li;
}

bool improved_in(std::span<const lcosd::TraceEntry> trace, std::uint64_t lo_excl,
                 std::uint64_t hi_incl) {
    double b = lcosd::kInf;
    for (std::uint64_t i = 0; i < hi_incl; ++i) {
        const bool imp = trace[i].gamma < b;
        if (imp) b = trace[i].gamma;
        if (imp && i + 1 > lo_excl) return true;
    }
    return false;
}

}  // namespace

std::array<double, kFeatureDim> extract_features(const channel::ReceivedFrame& frame,
                                                 const lcosd::LcosdContext& ctx,
                                                 std::span<const lcosd::TraceEntry> trace,
                                                 const CheckpointGrid& grid, std::size_t j) {
    if (j < 1 || j > grid.size()) throw std::invalid_argument("extract_features: bad checkpoint index");
    const std::uint64_t t_j = grid.points[j - 1];
    if (trace.size() < t_j) throw std::invalid_argument("extract_features: checkpoint not reached");

    const double s_total = frame.total_soft_weight;
    const double a_bar = frame.mean_reliability;
    const double log2_tmax = grid.t_max > 1 ? std::log2(double(grid.t_max)) : 1.0;

    double gamma_star;
    std::uint64_t last_improve;
    running_best(trace, t_j, &gamma_star, &last_improve);
    const double gamma_r = trace[t_j - 1].gamma_r;

    double d_gamma_star = 0.0, d_gamma_r = 0.0;
    if (j >= 2) {
        const std::uint64_t t_prev = grid.points[j - 2];
        double prev_star;
        std::uint64_t ignored;
        running_best(trace, t_prev, &prev_star, &ignored);
        d_gamma_star = prev_star - gamma_star;
        d_gamma_r = trace[t_prev - 1].gamma_r - gamma_r;
    }

    // consecutive checkpoints without improvement, saturating at 32
    std::uint64_t stall_cps = 0;
    for (std::size_t jj = 1; jj <= j; ++jj) {
        const std::uint64_t lo = jj >= 2 ? grid.points[jj - 2] : 0;
        stall_cps = improved_in(trace, lo, grid.points[jj - 1]) ? 0 : stall_cps + 1;
    }
    const std::uint64_t stall_teps = t_j - last_improve;

    const SetStats sl = stats_of(ctx.weights_L);
    const SetStats sr = stats_of(ctx.weights_R);
    const double nk = double(ctx.n - ctx.k);

    std::array<double, kFeatureDim> f{};
    f[0] = grid.t_max > 1 ? std::log2(double(t_j)) / log2_tmax : 0.0;
    f[1] = gamma_star / s_total;
    f[2] = gamma_r / s_total;
    f[3] = (gamma_star - gamma_r) / s_total;
    f[4] = sl.mean / a_bar;
    f[5] = sl.sd / a_bar;
    f[6] = sl.min / a_bar;
    f[7] = sr.mean / a_bar;
    f[8] = sr.sd / a_bar;
    f[9] = sr.min / a_bar;
    f[10] = double(ctx.delta) / nk;
    f[11] = double(ctx.l_size()) / nk;
    f[12] = d_gamma_star / s_total;
    f[13] = d_gamma_r / s_total;
    f[14] = std::min(1.0, double(stall_cps) / 32.0);
    f[15] = grid.t_max > 1 ? std::log2(double(std::max<std::uint64_t>(1, stall_teps))) / log2_tmax
                           : 0.0;
    return f;
}

CheckpointLabels label_checkpoints(const lcosd::Trace& trace, const CheckpointGrid& grid) {
    if (trace.empty()) throw std::invalid_argument("label_checkpoints: empty trace");
    CheckpointLabels out;
    out.total_teps = trace.size();
    const bool final_correct = trace.back().best_correct;
    for (std::uint64_t t_j : grid.points) {
        if (t_j > trace.size()) break;
        out.y.push_back(final_correct && !trace[t_j - 1].best_correct ? 1 : 0);
        out.residual.push_back(out.total_teps - t_j);
        ++out.reached;
    }
    return out;
}

Dataset gen_dataset(const gf2::LinearCode& code, std::span<const double> snr_db_list,
                    std::uint64_t frames_per_snr, int delta, std::uint64_t t_max,
                    const CheckpointGrid& grid, std::uint64_t seed, int workers) {
    if (snr_db_list.empty()) throw std::invalid_argument("gen_dataset: empty snr list");
    if (frames_per_snr == 0) throw std::invalid_argument("gen_dataset: frames must be >= 1");
    if (grid.points.empty() || grid.points.back() != t_max)
        throw std::invalid_argument("gen_dataset: grid inconsistent with t_max");

    Dataset ds;
    ds.code_id = code.name;
    const std::uint64_t total = snr_db_list.size() * frames_per_snr;
    std::vector<std::vector<CheckpointSample>> per_frame;

    // bounded chunks keep memory flat; output order stays (frame_id, j)
    const std::uint64_t chunk = 4096;
    for (std::uint64_t base = 0; base < total; base += chunk) {
        const std::uint64_t count = std::min(chunk, total - base);
        per_frame.assign(count, {});
        util::parallel_for(0, count, workers, [&](std::uint64_t i) {
            const std::uint64_t fid = base + i;
            const std::uint64_t snr_idx = fid / frames_per_snr;
            const std::uint64_t frame_idx = fid % frames_per_snr;
            const double snr_db = snr_db_list[snr_idx];
            auto rng = channel::FrameRng::for_frame(seed, snr_idx, frame_idx);
            const gf2::BitVec msg = rng.random_bits(std::size_t(code.k));
            const gf2::BitVec cw = gf2::encode(code, msg);
            const channel::ReceivedFrame frame =
                channel::transmit(cw, channel::ebn0_to_sigma2(snr_db, code.rate()), rng);
            const lcosd::LcosdContext ctx = lcosd::preprocess(code, frame, delta);
            lcosd::Trace trace;
            trace.reserve(std::size_t(std::min<std::uint64_t>(t_max, 16384)));
            lcosd::decode_full(ctx, t_max, &trace, &cw);
            const CheckpointLabels labels = label_checkpoints(trace, grid);
            auto& rows = per_frame[i];
            rows.reserve(labels.reached);
            for (std::size_t j = 1; j <= labels.reached; ++j) {
                CheckpointSample s;
                s.frame_id = fid;
                s.snr_db = snr_db;
                s.j = std::uint32_t(j);
                s.t_j = grid.points[j - 1];
                s.features = extract_features(frame, ctx, trace, grid, j);
                s.y = labels.y[j - 1];
                s.residual = labels.residual[j - 1];
                s.total_teps = labels.total_teps;
                rows.push_back(s);
            }
        });
        for (auto& rows : per_frame)
            ds.rows.insert(ds.rows.end(), rows.begin(), rows.end());
    }
    return ds;
}

void write_dataset_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open dataset file for writing: " + path);
    out << "frame_id,code_id,snr_db,j,t_j";
    for (int i = 1; i <= kFeatureDim; ++i) out << ",f" << i;
    out << ",y,r,T\n";
    char buf[32];
    for (const CheckpointSample& s : ds.rows) {
        out << s.frame_id << ',' << ds.code_id << ',';
        std::snprintf(buf, sizeof buf, "%.6g", s.snr_db);
        out << buf << ',' << s.j << ',' << s.t_j;
        for (double f : s.features) {
            std::snprintf(buf, sizeof buf, "%.9g", f);
            out << ',' << buf;
        }
        out << ',' << s.y << ',' << s.residual << ',' << s.total_teps << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset load_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("dataset file is empty: " + path);

    std::string expected = "frame_id,code_id,snr_db,j,t_j";
    for (int i = 1; i <= kFeatureDim; ++i) expected += ",f" + std::to_string(i);
    expected += ",y,r,T";
    if (line != expected) throw std::runtime_error("dataset file: unexpected header");

    Dataset ds;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        auto next_field = [&]() {
            if (!std::getline(ls, field, ','))
                throw std::runtime_error("dataset file: short row at line " + std::to_string(lineno));
            return field;
        };
        CheckpointSample s;
        try {
            s.frame_id = std::stoull(next_field());
            std::string code_id = next_field();
            if (ds.code_id.empty())
                ds.code_id = code_id;
            else if (ds.code_id != code_id)
                throw std::runtime_error("dataset file: mixed code ids");
            s.snr_db = std::stod(next_field());
            s.j = std::uint32_t(std::stoul(next_field()));
            s.t_j = std::stoull(next_field());
            for (double& f : s.features) f = std::stod(next_field());
            s.y = std::stoi(next_field());
            s.residual = std::stoull(next_field());
            s.total_teps = std::stoull(next_field());
        } catch (const std::invalid_argument&) {
            throw std::runtime_error("dataset file: bad field at line " + std::to_string(lineno));
        }
        ds.rows.push_back(s);
    }
    return ds;
}

NesDecodeResult nes_decode(const lcosd::LcosdContext& ctx, const channel::ReceivedFrame& frame,
                           const StoppingPolicy& policy, std::uint64_t t_max) {
    if (!policy.model || policy.model->empty())
        throw std::invalid_argument("nes_decode: policy has no model");
    if (!(policy.lambda > 0.0)) throw std::invalid_argument("nes_decode: lambda must be positive");
    if (policy.grid.points.empty() || policy.grid.points.back() != t_max ||
        policy.grid.t_max != t_max)
        throw std::invalid_argument("nes_decode: grid inconsistent with t_max");

    lcosd::TepStream stream(ctx);
    lcosd::Trace trace;
    trace.reserve(std::size_t(std::min<std::uint64_t>(t_max, 4096)));
    gf2::BitVec best_e_r;
    double best_gamma = lcosd::kInf;
    std::size_t j = 0;  // points into the grid, 0-based
    std::uint64_t teps = 0;

    lcosd::TepEvent ev;
    for (std::uint64_t t = 1; t <= t_max; ++t) {
        if (!stream.next(ev)) break;
        teps = t;
        const bool improved = ev.gamma < best_gamma;
        if (improved) {
            best_gamma = ev.gamma;
            best_e_r = ev.e_r;
        }
        trace.push_back({ev.gamma_r, ev.gamma, improved, false});
        if (j < policy.grid.size() && t == policy.grid.points[j]) {
            const auto phi = extract_features(frame, ctx, trace, policy.grid, j + 1);
            const double p = sigmoid(mlp_forward(*policy.model, phi, false, nullptr));
            const double threshold = double(policy.grid.gap(j + 1)) / policy.lambda;
            if (p <= threshold)
                return {lcosd::reconstruct(ctx, best_e_r), best_gamma, t, true};
            ++j;
        }
    }
    if (teps == 0) throw std::logic_error("nes_decode: no admissible TEP was emitted");
    return {lcosd::reconstruct(ctx, best_e_r), best_gamma, teps, false};
}

}  // namespace lcnes::nes
