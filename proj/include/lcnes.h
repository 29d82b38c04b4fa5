/* lcnes - soft-decision decoding of short binary block codes with LC-OSD and
 * learned early stopping.
 *
 * All functions return LCNES_OK (0) on success or a negative error code;
 * lcnes_last_error() describes the most recent failure on the calling thread.
 * Objects are opaque handles with create/destroy pairs.
 */
#ifndef LCNES_H
#define LCNES_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define LCNES_OK 0
#define LCNES_ERR_INVALID_ARGUMENT (-1) /* bad parameter or malformed spec string */
#define LCNES_ERR_PARSE (-2)            /* malformed input file */
#define LCNES_ERR_IO (-3)               /* file cannot be read or written */
#define LCNES_ERR_UNSUPPORTED (-4)      /* request outside supported limits */
#define LCNES_ERR_INTERNAL (-5)

const char* lcnes_version(void);
const char* lcnes_errstr(int code);
/* thread-local detail message for the last failing call */
const char* lcnes_last_error(void);

/* ---- codes ---------------------------------------------------------- */

typedef struct lcnes_code lcnes_code;

/* spec: "rm:r,m" | "ebch:m,k" | "alist:path" | "genmat:path".
 * Loader warnings (e.g. rank-deficient parity) are appended to
 * lcnes_code_warnings(). */
int lcnes_code_create(const char* spec, lcnes_code** out);
void lcnes_code_destroy(lcnes_code* code);

int lcnes_code_n(const lcnes_code* code);
int lcnes_code_k(const lcnes_code* code);
double lcnes_code_rate(const lcnes_code* code);
const char* lcnes_code_name(const lcnes_code* code);
const char* lcnes_code_warnings(const lcnes_code* code); /* empty string if none */

/* rank checks: *gh_zero = 1 iff G H^T = 0, ranks of G and H */
int lcnes_code_check(const lcnes_code* code, int* gh_zero, int* rank_g, int* rank_h);

/* exhaustive minimum distance; LCNES_ERR_UNSUPPORTED when k > 20 */
int lcnes_code_min_distance(const lcnes_code* code, int* dmin);

/* message: k bits (one byte each, 0/1), codeword: n bytes out */
int lcnes_code_encode(const lcnes_code* code, const uint8_t* message, uint8_t* codeword);

/* ---- models --------------------------------------------------------- */

typedef struct lcnes_model lcnes_model;

int lcnes_model_load(const char* path, lcnes_model** out);
int lcnes_model_save(const lcnes_model* model, const char* path);
/* untrained model with seeded fan-in initialization */
int lcnes_model_init(uint64_t seed, lcnes_model** out);
void lcnes_model_destroy(lcnes_model* model);

/* ---- single-frame decoding ------------------------------------------ */

#define LCNES_POLICY_FULL 0
#define LCNES_POLICY_OPTIMAL_STOP 1
#define LCNES_POLICY_FIXED_STALL 2
#define LCNES_POLICY_GENIE 3 /* benchmark-only; invalid here */
#define LCNES_POLICY_NES 4

typedef struct {
    int policy;
    int delta;          /* extended basis slack, default 8 */
    uint64_t t_max;     /* TEP budget, default 16384 */
    double lambda;      /* nes trade-off knob */
    uint64_t stall_budget;
    const lcnes_model* model; /* required for nes */
} lcnes_decode_opts;

void lcnes_decode_opts_init(lcnes_decode_opts* opts);

typedef struct {
    double gamma;        /* soft weight of the returned codeword */
    uint64_t teps_used;
    int stopped_early;
} lcnes_decode_info;

/* llr: n channel log-likelihood ratios; codeword: n bytes out */
int lcnes_decode(const lcnes_code* code, const double* llr, size_t n,
                 const lcnes_decode_opts* opts, uint8_t* codeword, lcnes_decode_info* info);

/* ---- trajectory datasets and training ------------------------------- */

typedef struct {
    const double* snr_db;
    size_t snr_count;
    uint64_t frames_per_snr;
    int delta;
    uint64_t t_max;
    uint64_t seed;
    int workers; /* <= 0 means all hardware threads */
} lcnes_dataset_opts;

void lcnes_dataset_opts_init(lcnes_dataset_opts* opts);

/* writes the checkpoint-sample CSV (header frame_id,code_id,snr_db,j,t_j,
 * f1..f16,y,r,T) */
int lcnes_gen_dataset(const lcnes_code* code, const lcnes_dataset_opts* opts,
                      const char* out_csv);

typedef struct {
    int steps;
    double learning_rate;
    double weight_decay;
    double grad_clip;
    double alpha;
    double kappa; /* <= 0: use the dataset's full-search TEP count */
    double beta;
    int batch_frames;
    uint64_t seed;
} lcnes_train_opts;

void lcnes_train_opts_init(lcnes_train_opts* opts);

/* trains on a dataset CSV; writes the model and optionally a per-step
 * loss-curve CSV (pass NULL to skip) */
int lcnes_train(const char* dataset_csv, const lcnes_train_opts* opts, const char* out_model,
                const char* out_loss_csv);

/* ---- Monte Carlo benchmark ------------------------------------------ */

typedef struct {
    int policy;
    const double* lambdas; /* nes: one result block per lambda */
    size_t lambda_count;
    const lcnes_model* model;
    uint64_t stall_budget;
    const double* snr_db;
    size_t snr_count;
    uint64_t frames;
    int delta;
    uint64_t t_max;
    uint64_t seed;
    int workers;
} lcnes_bench_opts;

void lcnes_bench_opts_init(lcnes_bench_opts* opts);

/* writes code,policy,lambda,snr_db,frames,frame_errors,fer,fer_ci95,avg_tep,
 * tep_p95,wall_s rows; identical (seed, config) reproduce identical results
 * regardless of the worker count (wall_s excepted) */
int lcnes_bench(const lcnes_code* code, const lcnes_bench_opts* opts, const char* out_csv);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* LCNES_H */
