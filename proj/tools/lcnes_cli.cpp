// command-line front end for the lcnes shared library
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lcnes.h"

namespace {

using nlohmann::json;

int api_exit_code(int rc) {
    return rc == LCNES_ERR_INVALID_ARGUMENT ? 1 : 2;
}

int report_api_error(const char* what, int rc) {
    std::cerr << "error: " << what << ": " << lcnes_errstr(rc);
    if (*lcnes_last_error()) std::cerr << " (" << lcnes_last_error() << ")";
    std::cerr << "\n";
    return api_exit_code(rc);
}

std::vector<double> parse_list(const std::string& csv, const char* what) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw CLI::ValidationError(std::string(what) + ": bad number '" + item + "'");
        }
    }
    if (out.empty()) throw CLI::ValidationError(std::string(what) + ": empty list");
    return out;
}

void write_manifest(const std::string& command, const json& params, std::uint64_t seed,
                    const std::vector<std::string>& outputs) {
    json m;
    m["command"] = command;
    m["version"] = lcnes_version();
    m["seed"] = seed;
    m["parameters"] = params;
    m["outputs"] = outputs;
    const std::string path = outputs.front() + ".manifest.json";
    std::ofstream f(path);
    f << m.dump(2) << "\n";
    if (!f) std::cerr << "warning: could not write manifest " << path << "\n";
}

struct CodeGuard {
    lcnes_code* code = nullptr;
    ~CodeGuard() { lcnes_code_destroy(code); }
};
struct ModelGuard {
    lcnes_model* model = nullptr;
    ~ModelGuard() { lcnes_model_destroy(model); }
};

int open_code(const std::string& spec, CodeGuard& guard) {
    const int rc = lcnes_code_create(spec.c_str(), &guard.code);
    if (rc != LCNES_OK) return report_api_error("loading code", rc);
    if (*lcnes_code_warnings(guard.code))
        std::cerr << "warning: " << lcnes_code_warnings(guard.code);
    return 0;
}

int policy_id(const std::string& name) {
    if (name == "full" || name == "full_budget") return LCNES_POLICY_FULL;
    if (name == "optimal" || name == "optimal_stop") return LCNES_POLICY_OPTIMAL_STOP;
    if (name == "stall" || name == "fixed_stall") return LCNES_POLICY_FIXED_STALL;
    if (name == "genie") return LCNES_POLICY_GENIE;
    if (name == "nes") return LCNES_POLICY_NES;
    throw CLI::ValidationError("unknown policy '" + name + "' (full|optimal|stall|genie|nes)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lcnes: LC-OSD decoding with learned early stopping"};
    app.require_subcommand(1);

    // code-info
    auto* info = app.add_subcommand("code-info", "print code parameters and sanity checks");
    std::string info_code;
    info->add_option("--code", info_code, "rm:r,m | ebch:m,k | alist:path | genmat:path")->required();

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate a trajectory dataset CSV");
    std::string gen_code, gen_snr, gen_out;
    std::uint64_t gen_frames = 0, gen_tmax = 16384, gen_seed = 1;
    int gen_delta = 8, gen_workers = 0;
    gen->add_option("--code", gen_code)->required();
    gen->add_option("--snr-list", gen_snr, "comma-separated Eb/N0 values in dB")->required();
    gen->add_option("--frames", gen_frames, "frames per SNR point")->required();
    gen->add_option("--delta", gen_delta, "extended basis slack")->capture_default_str();
    gen->add_option("--tmax", gen_tmax, "TEP budget")->capture_default_str();
    gen->add_option("--seed", gen_seed)->capture_default_str();
    gen->add_option("--workers", gen_workers, "0 = all hardware threads")->capture_default_str();
    gen->add_option("--out", gen_out, "output CSV path")->required();

    // train
    auto* tr = app.add_subcommand("train", "train the stopping estimator from a dataset CSV");
    std::string tr_data, tr_out;
    int tr_steps = 12000, tr_batch = 64;
    double tr_lr = 5e-4, tr_wd = 1e-4, tr_clip = 1.0, tr_alpha = 12.0, tr_beta = 0.05,
           tr_kappa = 0.0;
    std::uint64_t tr_seed = 1;
    tr->add_option("--data", tr_data, "dataset CSV")->required();
    tr->add_option("--out", tr_out, "output model path")->required();
    tr->add_option("--steps", tr_steps)->capture_default_str();
    tr->add_option("--lr", tr_lr)->capture_default_str();
    tr->add_option("--wd", tr_wd)->capture_default_str();
    tr->add_option("--clip", tr_clip)->capture_default_str();
    tr->add_option("--alpha", tr_alpha)->capture_default_str();
    tr->add_option("--kappa", tr_kappa, "0 = dataset full-search TEP count")->capture_default_str();
    tr->add_option("--beta", tr_beta)->capture_default_str();
    tr->add_option("--batch-frames", tr_batch)->capture_default_str();
    tr->add_option("--seed", tr_seed)->capture_default_str();

    // eval
    auto* ev = app.add_subcommand("eval", "Monte Carlo FER / average-TEP benchmark");
    std::string ev_code, ev_policy, ev_model, ev_snr, ev_lambda, ev_out;
    std::uint64_t ev_frames = 1000, ev_tmax = 16384, ev_seed = 1, ev_stall = 64;
    int ev_delta = 8, ev_workers = 0;
    ev->add_option("--code", ev_code)->required();
    ev->add_option("--policy", ev_policy, "full|optimal|stall|genie|nes")->required();
    ev->add_option("--model", ev_model, "model file (nes)");
    ev->add_option("--lambda", ev_lambda, "comma-separated trade-off values (nes)");
    ev->add_option("--snr-list", ev_snr)->required();
    ev->add_option("--frames", ev_frames)->capture_default_str();
    ev->add_option("--delta", ev_delta)->capture_default_str();
    ev->add_option("--tmax", ev_tmax)->capture_default_str();
    ev->add_option("--stall-budget", ev_stall, "fixed_stall budget")->capture_default_str();
    ev->add_option("--seed", ev_seed)->capture_default_str();
    ev->add_option("--workers", ev_workers, "0 = all hardware threads")->capture_default_str();
    ev->add_option("--out", ev_out, "output CSV path")->required();

    // decode
    auto* dec = app.add_subcommand("decode", "decode one LLR vector from a file");
    std::string dec_code, dec_policy, dec_model, dec_llr;
    double dec_lambda = 1024.0;
    std::uint64_t dec_tmax = 16384;
    int dec_delta = 8;
    dec->add_option("--code", dec_code)->required();
    dec->add_option("--llr-file", dec_llr, "one CSV row of n reals")->required();
    dec->add_option("--policy", dec_policy, "full|optimal|stall|nes")->required();
    dec->add_option("--model", dec_model);
    auto* dec_lambda_opt = dec->add_option("--lambda", dec_lambda)->capture_default_str();
    dec->add_option("--delta", dec_delta)->capture_default_str();
    dec->add_option("--tmax", dec_tmax)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*info) {
            CodeGuard c;
            if (int rc = open_code(info_code, c)) return rc;
            int gh = 0, rg = 0, rh = 0;
            lcnes_code_check(c.code, &gh, &rg, &rh);
            std::printf("name        %s\n", lcnes_code_name(c.code));
            std::printf("n           %d\n", lcnes_code_n(c.code));
            std::printf("k           %d\n", lcnes_code_k(c.code));
            std::printf("rate        %.6g\n", lcnes_code_rate(c.code));
            std::printf("G*H^T == 0  %s\n", gh ? "yes" : "NO");
            std::printf("rank(G)     %d\n", rg);
            std::printf("rank(H)     %d\n", rh);
            int dmin = 0;
            if (lcnes_code_min_distance(c.code, &dmin) == LCNES_OK)
                std::printf("d_min       %d\n", dmin);
            else
                std::printf("d_min       n/a (k > 20)\n");
            return gh && rg == lcnes_code_k(c.code) ? 0 : 2;
        }

        if (*gen) {
            if (gen_frames == 0) {
                std::cerr << "error: --frames must be >= 1\n";
                return 1;
            }
            CodeGuard c;
            if (int rc = open_code(gen_code, c)) return rc;
            const std::vector<double> snr = parse_list(gen_snr, "--snr-list");
            lcnes_dataset_opts opts;
            lcnes_dataset_opts_init(&opts);
            opts.snr_db = snr.data();
            opts.snr_count = snr.size();
            opts.frames_per_snr = gen_frames;
            opts.delta = gen_delta;
            opts.t_max = gen_tmax;
            opts.seed = gen_seed;
            opts.workers = gen_workers;
            const int rc = lcnes_gen_dataset(c.code, &opts, gen_out.c_str());
            if (rc != LCNES_OK) return report_api_error("gen-data", rc);
            write_manifest("gen-data",
                           json{{"code", gen_code},
                                {"snr_list", snr},
                                {"frames", gen_frames},
                                {"delta", gen_delta},
                                {"tmax", gen_tmax},
                                {"workers", gen_workers}},
                           gen_seed, {gen_out});
            return 0;
        }

        if (*tr) {
            lcnes_train_opts opts;
            lcnes_train_opts_init(&opts);
            opts.steps = tr_steps;
            opts.learning_rate = tr_lr;
            opts.weight_decay = tr_wd;
            opts.grad_clip = tr_clip;
            opts.alpha = tr_alpha;
            opts.kappa = tr_kappa;
            opts.beta = tr_beta;
            opts.batch_frames = tr_batch;
            opts.seed = tr_seed;
            const std::string loss_csv = tr_out + ".loss.csv";
            const int rc = lcnes_train(tr_data.c_str(), &opts, tr_out.c_str(), loss_csv.c_str());
            if (rc != LCNES_OK) return report_api_error("train", rc);
            write_manifest("train",
                           json{{"data", tr_data},
                                {"steps", tr_steps},
                                {"lr", tr_lr},
                                {"wd", tr_wd},
                                {"clip", tr_clip},
                                {"alpha", tr_alpha},
                                {"kappa", tr_kappa == 0.0 ? json("auto") : json(tr_kappa)},
                                {"beta", tr_beta},
                                {"batch_frames", tr_batch}},
                           tr_seed, {tr_out, loss_csv});
            return 0;
        }

        if (*ev) {
            CodeGuard c;
            if (int rc = open_code(ev_code, c)) return rc;
            const std::vector<double> snr = parse_list(ev_snr, "--snr-list");
            const int policy = policy_id(ev_policy);
            std::vector<double> lambdas;
            if (!ev_lambda.empty()) lambdas = parse_list(ev_lambda, "--lambda");
            if (policy != LCNES_POLICY_NES && !lambdas.empty()) {
                std::cerr << "warning: --lambda is ignored for policy " << ev_policy << "\n";
                lambdas.clear();
            }
            if (policy == LCNES_POLICY_NES && lambdas.empty()) {
                std::cerr << "error: nes policy needs --lambda\n";
                return 1;
            }
            ModelGuard m;
            if (policy == LCNES_POLICY_NES) {
                if (ev_model.empty()) {
                    std::cerr << "error: nes policy needs --model\n";
                    return 1;
                }
                const int rc = lcnes_model_load(ev_model.c_str(), &m.model);
                if (rc != LCNES_OK) return report_api_error("loading model", rc);
            }
            lcnes_bench_opts opts;
            lcnes_bench_opts_init(&opts);
            opts.policy = policy;
            opts.lambdas = lambdas.empty() ? nullptr : lambdas.data();
            opts.lambda_count = lambdas.size();
            opts.model = m.model;
            opts.stall_budget = ev_stall;
            opts.snr_db = snr.data();
            opts.snr_count = snr.size();
            opts.frames = ev_frames;
            opts.delta = ev_delta;
            opts.t_max = ev_tmax;
            opts.seed = ev_seed;
            opts.workers = ev_workers;
            const int rc = lcnes_bench(c.code, &opts, ev_out.c_str());
            if (rc != LCNES_OK) return report_api_error("eval", rc);
            write_manifest("eval",
                           json{{"code", ev_code},
                                {"policy", ev_policy},
                                {"model", ev_model},
                                {"lambda", lambdas},
                                {"snr_list", snr},
                                {"frames", ev_frames},
                                {"delta", ev_delta},
                                {"tmax", ev_tmax},
                                {"stall_budget", ev_stall},
                                {"workers", ev_workers}},
                           ev_seed, {ev_out});
            return 0;
        }

        if (*dec) {
            CodeGuard c;
            if (int rc = open_code(dec_code, c)) return rc;
            const int policy = policy_id(dec_policy);
            if (policy != LCNES_POLICY_NES && dec_lambda_opt->count() > 0)
                std::cerr << "warning: --lambda is ignored for policy " << dec_policy << "\n";

            std::ifstream f(dec_llr);
            if (!f) {
                std::cerr << "error: cannot open " << dec_llr << "\n";
                return 2;
            }
            std::vector<double> llr;
            std::string tok;
            while (std::getline(f, tok, ',')) {
                std::stringstream ws(tok);  // also splits on whitespace
                std::string num;
                while (ws >> num) {
                    try {
                        llr.push_back(std::stod(num));
                    } catch (const std::exception&) {
                        std::cerr << "error: bad LLR value '" << num << "'\n";
                        return 2;
                    }
                }
            }
            if (llr.size() != std::size_t(lcnes_code_n(c.code))) {
                std::cerr << "error: expected " << lcnes_code_n(c.code) << " LLR values, got "
                          << llr.size() << "\n";
                return 2;
            }
            ModelGuard m;
            lcnes_decode_opts opts;
            lcnes_decode_opts_init(&opts);
            opts.policy = policy;
            opts.delta = dec_delta;
            opts.t_max = dec_tmax;
            opts.lambda = dec_lambda;
            if (policy == LCNES_POLICY_NES) {
                if (dec_model.empty()) {
                    std::cerr << "error: nes policy needs --model\n";
                    return 1;
                }
                const int rc = lcnes_model_load(dec_model.c_str(), &m.model);
                if (rc != LCNES_OK) return report_api_error("loading model", rc);
                opts.model = m.model;
            }
            std::vector<std::uint8_t> bits(std::size_t(lcnes_code_n(c.code)));
            lcnes_decode_info out_info;
            const int rc = lcnes_decode(c.code, llr.data(), llr.size(), &opts, bits.data(), &out_info);
            if (rc != LCNES_OK) return report_api_error("decode", rc);
            std::string s(bits.size(), '0');
            for (std::size_t i = 0; i < bits.size(); ++i)
                if (bits[i]) s[i] = '1';
            std::printf("codeword %s\n", s.c_str());
            std::printf("gamma %.10g\n", out_info.gamma);
            std::printf("teps_used %llu\n", static_cast<unsigned long long>(out_info.teps_used));
            std::printf("stopped_early %d\n", out_info.stopped_early);
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
