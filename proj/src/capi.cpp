#include "lcnes.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <stdexcept>
#include <string>

#include "bench.hpp"
#include "channel.hpp"
#include "codes.hpp"
#include "lcosd.hpp"
#include "mlp.hpp"
#include "nes.hpp"
#include "train.hpp"

namespace {

thread_local std::string g_last_error;

struct CodeHandle {
    lcnes::gf2::LinearCode code;
    std::string warnings;
};

lcnes::nes::MlpModel* unwrap(lcnes_model* m) { return reinterpret_cast<lcnes::nes::MlpModel*>(m); }
const lcnes::nes::MlpModel* unwrap(const lcnes_model* m) {
    return reinterpret_cast<const lcnes::nes::MlpModel*>(m);
}
CodeHandle* unwrap(lcnes_code* c) { return reinterpret_cast<CodeHandle*>(c); }
const CodeHandle* unwrap(const lcnes_code* c) { return reinterpret_cast<const CodeHandle*>(c); }

int fail(int code, const char* what) {
    g_last_error = what;
    return code;
}

// runtime_error carries parse/io problems out of the core; anything file
// related maps to PARSE unless the message says the file cannot be opened
int map_exception() {
    try {
        throw;
    } catch (const std::invalid_argument& e) {
        g_last_error = e.what();
        if (g_last_error.find("unsupported") != std::string::npos) return LCNES_ERR_UNSUPPORTED;
        if (g_last_error.find("refused") != std::string::npos) return LCNES_ERR_UNSUPPORTED;
        return LCNES_ERR_INVALID_ARGUMENT;
    } catch (const std::runtime_error& e) {
        g_last_error = e.what();
        if (g_last_error.find("cannot open") != std::string::npos ||
            g_last_error.find("write failed") != std::string::npos)
            return LCNES_ERR_IO;
        return LCNES_ERR_PARSE;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return LCNES_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return LCNES_ERR_INTERNAL;
    }
}

lcnes::bench::Policy to_policy(int p) {
    switch (p) {
        case LCNES_POLICY_FULL: return lcnes::bench::Policy::full_budget;
        case LCNES_POLICY_OPTIMAL_STOP: return lcnes::bench::Policy::optimal_stop;
        case LCNES_POLICY_FIXED_STALL: return lcnes::bench::Policy::fixed_stall;
        case LCNES_POLICY_GENIE: return lcnes::bench::Policy::genie;
        case LCNES_POLICY_NES: return lcnes::bench::Policy::nes;
        default: throw std::invalid_argument("unknown policy id");
    }
}

}  // namespace

extern "C" {

const char* lcnes_version(void) { return "0.1.0"; }

const char* lcnes_errstr(int code) {
    switch (code) {
        case LCNES_OK: return "ok";
        case LCNES_ERR_INVALID_ARGUMENT: return "invalid argument";
        case LCNES_ERR_PARSE: return "parse error";
        case LCNES_ERR_IO: return "io error";
        case LCNES_ERR_UNSUPPORTED: return "unsupported";
        case LCNES_ERR_INTERNAL: return "internal error";
        default: return "unknown error";
    }
}

const char* lcnes_last_error(void) { return g_last_error.c_str(); }

int lcnes_code_create(const char* spec, lcnes_code** out) {
    if (!spec || !out) return fail(LCNES_ERR_INVALID_ARGUMENT, "null argument");
    try {
        auto handle = std::make_unique<CodeHandle>();
        handle->code = lcnes::gf2::parse_code_spec(spec, &handle->warnings);
        *out = reinterpret_cast<lcnes_code*>(handle.release());
        return LCNES_OK;
    } catch (...) {
        return map_exception();
    }
}

void lcnes_code_destroy(lcnes_code* code) { delete unwrap(code); }

int lcnes_code_n(const lcnes_code* code) { return code ? unwrap(code)->code.n : 0; }
int lcnes_code_k(const lcnes_code* code) { return code ? unwrap(code)->code.k : 0; }
double lcnes_code_rate(const lcnes_code* code) { return code ? unwrap(code)->code.rate() : 0.0; }
const char* lcnes_code_name(const lcnes_code* code) {
    return code ? unwrap(code)->code.name.c_str() : "";
}
const char* lcnes_code_warnings(const lcnes_code* code) {
    return code ? unwrap(code)->warnings.c_str() : "";
}

int lcnes_code_check(const lcnes_code* code, int* gh_zero, int* rank_g, int* rank_h) {
    if (!code) return fail(LCNES_ERR_INVALID_ARGUMENT, "null code");
    try {
        const lcnes::gf2::LinearCode& c = unwrap(code)->code;
        if (gh_zero) *gh_zero = c.generator.times(c.parity.transposed()).is_zero() ? 1 : 0;
        if (rank_g) *rank_g = lcnes::gf2::rank(c.generator);
        if (rank_h) *rank_h = lcnes::gf2::rank(c.parity);
        return LCNES_OK;
    } catch (...) {
        return map_exception();
    }
}

int lcnes_code_min_distance(const lcnes_code* code, int* dmin) {
    if (!code || !dmin) return fail(LCNES_ERR_INVALID_ARGUMENT, "null argument");
    try {
        *dmin = lcnes::gf2::min_distance_bruteforce(unwrap(code)->code);
        return LCNES_OK;
    } catch (...) {
        return map_exception();
    }
}

int lcnes_code_encode(const lcnes_code* code, const uint8_t* message, uint8_t* codeword) {
    if (!code || !message || !codeword) return fail(LCNES_ERR_INVALID_ARGUMENT, "null argument");
    try {
        const lcnes::gf2::LinearCode& c = unwrap(code)->code;
        const auto msg = lcnes::gf2::BitVec::from_bytes(message, std::size_t(c.k));
        lcnes::gf2::encode(c, msg).to_bytes(codeword);
        return LCNES_OK;
    } catch (...) {
        return map_exception();
    }
}

int lcnes_model_load(const char* path, lcnes_model** out) {
    if (!path || !out) return fail(LCNES_ERR_INVALID_ARGUMENT, "null argument");
    try {
        auto m = std::make_unique<lcnes::nes::MlpModel>(lcnes::nes::load_model(path));
        *out = reinterpret_cast<lcnes_model*>(m.release());
        return LCNES_OK;
    } catch (...) {
        return map_exception();
    }
}

int lcnes_model_save(const lcnes_model* model, const char* path) {
    if (!model || !path) return fail(LCNES_ERR_INVALID_ARGUMENT, "null argument");
    try {
        lcnes::nes::save_model(*unwrap(model), path);
        return LCNES_OK;
    } catch (...) {
        return map_exception();
    }
}

int lcnes_model_init(uint64_t seed, lcnes_model** out) {
    if (!out) return fail(LCNES_ERR_INVALID_ARGUMENT, "null argument");
    try {
        auto m = std::make_unique<lcnes::nes::MlpModel>(lcnes::nes::mlp_init(seed));
        *out = reinterpret_cast<lcnes_model*>(m.release());
        return LCNES_OK;
    } catch (...) {
        return map_exception();
    }
}

void lcnes_model_destroy(lcnes_model* model) { delete unwrap(model); }

void lcnes_decode_opts_init(lcnes_decode_opts* opts) {
    if (!opts) return;
    opts->policy = LCNES_POLICY_OPTIMAL_STOP;
    opts->delta = 8;
    opts->t_max = 16384;
    opts->lambda = 1024.0;
    opts->stall_budget = 64;
    opts->model = nullptr;
}

int lcnes_decode(const lcnes_code* code, const double* llr, size_t n,
                 const lcnes_decode_opts* opts, uint8_t* codeword, lcnes_decode_info* info) {
    if (!code || !llr || !opts || !codeword) return fail(LCNES_ERR_INVALID_ARGUMENT, "null argument");
    try {
        const lcnes::gf2::LinearCode& c = unwrap(code)->code;
        if (n != std::size_t(c.n)) throw std::invalid_argument("llr length != n");
        if (opts->policy == LCNES_POLICY_GENIE)
            throw std::invalid_argument("genie policy needs the transmitted codeword; use the benchmark");

        // rebuild a frame view from raw LLRs; sigma2 is immaterial here
        lcnes::channel::ReceivedFrame frame;
        frame.llr.assign(llr, llr + n);
        frame.y.assign(llr, llr + n);
        frame.sigma2 = 2.0;  // with y := llr this keeps llr = 2y/sigma2 consistent
        frame.z.resize(n);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            frame.z.set(i, llr[i] < 0.0);
            s += std::abs(llr[i]);
        }
        frame.total_soft_weight = s;
        frame.mean_reliability = s / double(n);

        const auto ctx = lcnes::lcosd::preprocess(c, frame, opts->delta);
        lcnes::gf2::BitVec out_bits;
        double gamma = 0.0;
        std::uint64_t teps = 0;
        bool early = false;
        switch (opts->policy) {
            case LCNES_POLICY_FULL: {
                const auto st = lcnes::lcosd::decode_full(ctx, opts->t_max);
                out_bits = st.best_candidate;
                gamma = st.best_gamma;
                teps = st.teps;
                break;
            }
            case LCNES_POLICY_OPTIMAL_STOP: {
                const auto st = lcnes::lcosd::decode_optimal_stop(ctx, opts->t_max);
                out_bits = st.best_candidate;
                gamma = st.best_gamma;
                teps = st.teps;
                early = teps < opts->t_max;
                break;
            }
            case LCNES_POLICY_FIXED_STALL: {
                lcnes::lcosd::TepStream stream(ctx);
                lcnes::gf2::BitVec best_e;
                double best = lcnes::lcosd::kInf;
                std::uint64_t stall = 0;
                lcnes::lcosd::TepEvent ev;
                for (std::uint64_t t = 1; t <= opts->t_max; ++t) {
                    if (!stream.next(ev)) break;
                    teps = t;
                    if (ev.gamma < best) {
                        best = ev.gamma;
                        best_e = ev.e_r;
                        stall = 0;
                    } else if (++stall >= opts->stall_budget) {
                        early = true;
                        break;
                    }
                }
                out_bits = lcnes::lcosd::reconstruct(ctx, best_e);
                gamma = best;
                break;
            }
            case LCNES_POLICY_NES: {
                if (!opts->model) throw std::invalid_argument("nes policy requires a model");
                lcnes::nes::StoppingPolicy policy{unwrap(opts->model), opts->lambda,
                                                  lcnes::nes::make_grid(opts->t_max)};
                const auto r = lcnes::nes::nes_decode(ctx, frame, policy, opts->t_max);
                out_bits = r.codeword;
                gamma = r.gamma;
                teps = r.teps_used;
                early = r.stopped_early;
                break;
            }
            default:
                throw std::invalid_argument("unknown policy id");
        }
        out_bits.to_bytes(codeword);
        if (info) {
            info->gamma = gamma;
            info->teps_used = teps;
            info->stopped_early = early ? 1 : 0;
        }
        return LCNES_OK;
    } catch (...) {
        return map_exception();
    }
}

void lcnes_dataset_opts_init(lcnes_dataset_opts* opts) {
    if (!opts) return;
    opts->snr_db = nullptr;
    opts->snr_count = 0;
    opts->frames_per_snr = 0;
    opts->delta = 8;
    opts->t_max = 16384;
    opts->seed = 1;
    opts->workers = 0;
}

int lcnes_gen_dataset(const lcnes_code* code, const lcnes_dataset_opts* opts,
                      const char* out_csv) {
    if (!code || !opts || !out_csv || !opts->snr_db)
        return fail(LCNES_ERR_INVALID_ARGUMENT, "null argument");
    try {
        const auto grid = lcnes::nes::make_grid(opts->t_max);
        const auto ds = lcnes::nes::gen_dataset(
            unwrap(code)->code, {opts->snr_db, opts->snr_count}, opts->frames_per_snr,
            opts->delta, opts->t_max, grid, opts->seed, opts->workers);
        lcnes::nes::write_dataset_csv(ds, out_csv);
        return LCNES_OK;
    } catch (...) {
        return map_exception();
    }
}

void lcnes_train_opts_init(lcnes_train_opts* opts) {
    if (!opts) return;
    opts->steps = 12000;
    opts->learning_rate = 5e-4;
    opts->weight_decay = 1e-4;
    opts->grad_clip = 1.0;
    opts->alpha = 12.0;
    opts->kappa = 0.0;  // resolved from the dataset
    opts->beta = 0.05;
    opts->batch_frames = 64;
    opts->seed = 1;
}

int lcnes_train(const char* dataset_csv, const lcnes_train_opts* opts, const char* out_model,
                const char* out_loss_csv) {
    if (!dataset_csv || !opts || !out_model)
        return fail(LCNES_ERR_INVALID_ARGUMENT, "null argument");
    try {
        const auto ds = lcnes::nes::load_dataset_csv(dataset_csv);
        if (ds.rows.empty()) throw std::runtime_error("dataset has no rows");
        lcnes::nes::TrainConfig cfg;
        cfg.steps = opts->steps;
        cfg.learning_rate = opts->learning_rate;
        cfg.weight_decay = opts->weight_decay;
        cfg.grad_clip = opts->grad_clip;
        cfg.alpha = opts->alpha;
        cfg.beta = opts->beta;
        cfg.batch_frames = opts->batch_frames;
        cfg.seed = opts->seed;
        if (opts->kappa > 0.0) {
            cfg.kappa = opts->kappa;
        } else {
            std::uint64_t t = 1;
            for (const auto& row : ds.rows) t = std::max(t, row.total_teps);
            cfg.kappa = double(t);
        }
        const auto res = lcnes::nes::train(ds, cfg);
        lcnes::nes::save_model(res.model, out_model);
        if (out_loss_csv) {
            std::ofstream out(out_loss_csv);
            if (!out) throw std::runtime_error(std::string("cannot open loss file for writing: ") +
                                               out_loss_csv);
            out << "step,loss\n";
            char buf[32];
            for (std::size_t i = 0; i < res.loss_curve.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%.9g", res.loss_curve[i]);
                out << (i + 1) << ',' << buf << '\n';
            }
        }
        return LCNES_OK;
    } catch (...) {
        return map_exception();
    }
}

void lcnes_bench_opts_init(lcnes_bench_opts* opts) {
    if (!opts) return;
    opts->policy = LCNES_POLICY_OPTIMAL_STOP;
    opts->lambdas = nullptr;
    opts->lambda_count = 0;
    opts->model = nullptr;
    opts->stall_budget = 64;
    opts->snr_db = nullptr;
    opts->snr_count = 0;
    opts->frames = 1000;
    opts->delta = 8;
    opts->t_max = 16384;
    opts->seed = 1;
    opts->workers = 0;
}

int lcnes_bench(const lcnes_code* code, const lcnes_bench_opts* opts, const char* out_csv) {
    if (!code || !opts || !out_csv || !opts->snr_db)
        return fail(LCNES_ERR_INVALID_ARGUMENT, "null argument");
    try {
        lcnes::bench::BenchConfig cfg;
        cfg.code = &unwrap(code)->code;
        cfg.policy = to_policy(opts->policy);
        cfg.model = opts->model ? unwrap(opts->model) : nullptr;
        cfg.stall_budget = opts->stall_budget;
        cfg.snr_db.assign(opts->snr_db, opts->snr_db + opts->snr_count);
        cfg.frames = opts->frames;
        cfg.delta = opts->delta;
        cfg.t_max = opts->t_max;
        cfg.seed = opts->seed;
        cfg.workers = opts->workers;

        std::vector<lcnes::bench::BenchResult> results;
        if (cfg.policy == lcnes::bench::Policy::nes) {
            if (!opts->lambdas || opts->lambda_count == 0)
                throw std::invalid_argument("nes policy requires at least one lambda");
            results = lcnes::bench::sweep_lambda(
                cfg, {opts->lambdas, opts->lambda_count});
        } else {
            results.push_back(lcnes::bench::run(cfg));
        }
        std::ofstream out(out_csv);
        if (!out) throw std::runtime_error(std::string("cannot open bench csv for writing: ") + out_csv);
        lcnes::bench::write_csv(out, unwrap(code)->code.name, results);
        return LCNES_OK;
    } catch (...) {
        return map_exception();
    }
}

}  // extern "C"
