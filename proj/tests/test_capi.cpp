// exercises the public C surface end to end, the way an external consumer
// (or the CLI) would
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "lcnes.h"

TEST_CASE("version and error strings") {
    CHECK(std::string(lcnes_version()) == "0.1.0");
    CHECK(std::string(lcnes_errstr(LCNES_OK)) == "ok");
    CHECK(std::string(lcnes_errstr(LCNES_ERR_PARSE)) == "parse error");
}

TEST_CASE("code lifecycle and queries") {
    lcnes_code* code = nullptr;
    REQUIRE(lcnes_code_create("rm:1,3", &code) == LCNES_OK);
    CHECK(lcnes_code_n(code) == 8);
    CHECK(lcnes_code_k(code) == 4);
    CHECK(lcnes_code_rate(code) == doctest::Approx(0.5));
    CHECK(std::string(lcnes_code_name(code)) == "rm_1_3");
    CHECK(std::string(lcnes_code_warnings(code)).empty());

    int gh = 0, rg = 0, rh = 0;
    CHECK(lcnes_code_check(code, &gh, &rg, &rh) == LCNES_OK);
    CHECK(gh == 1);
    CHECK(rg == 4);
    CHECK(rh == 4);

    int dmin = 0;
    CHECK(lcnes_code_min_distance(code, &dmin) == LCNES_OK);
    CHECK(dmin == 4);

    std::uint8_t msg[4] = {1, 0, 1, 1};
    std::uint8_t cw[8];
    CHECK(lcnes_code_encode(code, msg, cw) == LCNES_OK);
    lcnes_code_destroy(code);

    lcnes_code* bad = nullptr;
    CHECK(lcnes_code_create("rm:9,3", &bad) == LCNES_ERR_INVALID_ARGUMENT);
    CHECK(std::strlen(lcnes_last_error()) > 0);
    CHECK(lcnes_code_create("nonsense", &bad) == LCNES_ERR_INVALID_ARGUMENT);
    CHECK(lcnes_code_create("alist:/no/such/file", &bad) == LCNES_ERR_IO);
}

TEST_CASE("minimum distance refuses large dimensions") {
    lcnes_code* code = nullptr;
    REQUIRE(lcnes_code_create("ebch:7,64", &code) == LCNES_OK);
    int dmin = 0;
    CHECK(lcnes_code_min_distance(code, &dmin) == LCNES_ERR_UNSUPPORTED);
    lcnes_code_destroy(code);
}

TEST_CASE("model init, save, load") {
    lcnes_model* model = nullptr;
    REQUIRE(lcnes_model_init(7, &model) == LCNES_OK);
    REQUIRE(lcnes_model_save(model, "capi_model.txt") == LCNES_OK);
    lcnes_model* back = nullptr;
    REQUIRE(lcnes_model_load("capi_model.txt", &back) == LCNES_OK);
    lcnes_model_destroy(model);
    lcnes_model_destroy(back);
    std::remove("capi_model.txt");

    CHECK(lcnes_model_load("missing.model", &back) == LCNES_ERR_IO);
}

TEST_CASE("single frame decode") {
    lcnes_code* code = nullptr;
    REQUIRE(lcnes_code_create("rm:1,3", &code) == LCNES_OK);
    lcnes_decode_opts opts;
    lcnes_decode_opts_init(&opts);
    opts.delta = 2;
    opts.t_max = 16;

    // strongly positive LLRs: the all-zero codeword wins immediately
    std::vector<double> llr(8, 25.0);
    std::uint8_t bits[8];
    lcnes_decode_info info;
    REQUIRE(lcnes_decode(code, llr.data(), llr.size(), &opts, bits, &info) == LCNES_OK);
    for (int i = 0; i < 8; ++i) CHECK(bits[i] == 0);
    CHECK(info.gamma == 0.0);
    CHECK(info.teps_used <= 2);

    // wrong length is rejected
    CHECK(lcnes_decode(code, llr.data(), 7, &opts, bits, &info) == LCNES_ERR_INVALID_ARGUMENT);
    // genie needs ground truth, not available through this entry point
    opts.policy = LCNES_POLICY_GENIE;
    CHECK(lcnes_decode(code, llr.data(), 8, &opts, bits, &info) == LCNES_ERR_INVALID_ARGUMENT);
    // nes without model
    opts.policy = LCNES_POLICY_NES;
    CHECK(lcnes_decode(code, llr.data(), 8, &opts, bits, &info) == LCNES_ERR_INVALID_ARGUMENT);

    opts.policy = LCNES_POLICY_FULL;
    REQUIRE(lcnes_decode(code, llr.data(), 8, &opts, bits, &info) == LCNES_OK);
    CHECK(info.teps_used == 16);

    // crafted mixed-sign LLRs: the decoder must match a brute-force ML
    // search run through the same public surface
    const double crafted[8] = {-0.8, 2.1, 0.3, -3.5, 1.2, -0.4, 0.9, 2.6};
    REQUIRE(lcnes_decode(code, crafted, 8, &opts, bits, &info) == LCNES_OK);
    double best_gamma = 1e300;
    for (unsigned msg = 0; msg < 16; ++msg) {
        std::uint8_t m[4], cand[8];
        for (int b = 0; b < 4; ++b) m[b] = (msg >> b) & 1u;
        REQUIRE(lcnes_code_encode(code, m, cand) == LCNES_OK);
        double gamma = 0.0;
        for (int i = 0; i < 8; ++i) {
            const std::uint8_t hard = crafted[i] < 0.0 ? 1 : 0;
            if (cand[i] != hard) gamma += std::abs(crafted[i]);
        }
        best_gamma = std::min(best_gamma, gamma);
    }
    CHECK(info.gamma == best_gamma);

    lcnes_code_destroy(code);
}

TEST_CASE("dataset, training and benchmark round trip through files") {
    lcnes_code* code = nullptr;
    REQUIRE(lcnes_code_create("rm:1,3", &code) == LCNES_OK);

    const double snrs[] = {0.0, 3.0};
    lcnes_dataset_opts dopts;
    lcnes_dataset_opts_init(&dopts);
    dopts.snr_db = snrs;
    dopts.snr_count = 2;
    dopts.frames_per_snr = 60;
    dopts.delta = 2;
    dopts.t_max = 16;
    dopts.seed = 5;
    dopts.workers = 2;
    REQUIRE(lcnes_gen_dataset(code, &dopts, "capi_ds.csv") == LCNES_OK);

    {
        std::ifstream f("capi_ds.csv");
        std::string header;
        std::getline(f, header);
        CHECK(header.rfind("frame_id,code_id,snr_db,j,t_j,f1,", 0) == 0);
    }

    lcnes_train_opts topts;
    lcnes_train_opts_init(&topts);
    CHECK(topts.steps == 12000);
    CHECK(topts.learning_rate == 5e-4);
    CHECK(topts.weight_decay == 1e-4);
    CHECK(topts.grad_clip == 1.0);
    CHECK(topts.alpha == 12.0);
    CHECK(topts.beta == 0.05);
    CHECK(topts.batch_frames == 64);
    topts.steps = 100;
    topts.seed = 9;
    REQUIRE(lcnes_train("capi_ds.csv", &topts, "capi_model2.txt", "capi_loss.csv") == LCNES_OK);
    {
        std::ifstream f("capi_loss.csv");
        std::string header, first;
        std::getline(f, header);
        CHECK(header == "step,loss");
        std::getline(f, first);
        CHECK(first.rfind("1,", 0) == 0);
    }

    lcnes_model* model = nullptr;
    REQUIRE(lcnes_model_load("capi_model2.txt", &model) == LCNES_OK);

    lcnes_bench_opts bopts;
    lcnes_bench_opts_init(&bopts);
    const double lambdas[] = {8.0, 64.0};
    bopts.policy = LCNES_POLICY_NES;
    bopts.lambdas = lambdas;
    bopts.lambda_count = 2;
    bopts.model = model;
    bopts.snr_db = snrs;
    bopts.snr_count = 2;
    bopts.frames = 100;
    bopts.delta = 2;
    bopts.t_max = 16;
    bopts.seed = 4;
    bopts.workers = 2;
    REQUIRE(lcnes_bench(code, &bopts, "capi_bench.csv") == LCNES_OK);
    {
        std::ifstream f("capi_bench.csv");
        std::string line;
        std::getline(f, line);
        CHECK(line ==
              "code,policy,lambda,snr_db,frames,frame_errors,fer,fer_ci95,avg_tep,tep_p95,wall_s");
        int rows = 0;
        while (std::getline(f, line)) ++rows;
        CHECK(rows == 4);  // 2 lambdas x 2 snr points
    }

    // nes policy demands a lambda list
    bopts.lambda_count = 0;
    CHECK(lcnes_bench(code, &bopts, "capi_bench.csv") == LCNES_ERR_INVALID_ARGUMENT);

    lcnes_model_destroy(model);
    lcnes_code_destroy(code);
    std::remove("capi_ds.csv");
    std::remove("capi_model2.txt");
    std::remove("capi_model2.txt.loss.csv");
    std::remove("capi_loss.csv");
    std::remove("capi_bench.csv");
}
