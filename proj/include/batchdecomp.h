#ifndef BATCHDECOMP_H
#define BATCHDECOMP_H

/*
 * C interface to the batch-decomposition library. All objects are opaque
 * handles created and destroyed here; every fallible call returns a
 * bd_status, and bd_last_error() describes the most recent failure on the
 * calling thread. Returned strings and index buffers are owned by the caller
 * and released with bd_string_free / bd_index_buffer_free.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bd_status {
    BD_OK = 0,
    BD_INFEASIBLE = 1,
    BD_INVALID_INPUT = 2,
    BD_BUDGET_EXHAUSTED = 3
} bd_status;

const char* bd_status_name(bd_status status);
const char* bd_last_error(void);

typedef struct bd_dataset bd_dataset;
typedef struct bd_graph bd_graph;
typedef struct bd_decomposition bd_decomposition;
typedef struct bd_subset bd_subset;

/* ---- closed-form calculators ---- */

/* Growth scales of the largest similarity set. p0 is the probability that a
 * point is corrupted. */
bd_status bd_delta_lambda(uint64_t n, uint32_t d, double r_n, double p0, double p_up,
                          double* delta, double* lambda);

/* Mean categorical survival factor over the given distribution. */
bd_status bd_zeta(uint64_t n, uint32_t d, double r_n, uint32_t k, double eps_up,
                  const double* cat_probs, size_t cat_count, double* zeta);

/* Two-sided relative deviation tail 2 exp(-gamma^2 theta / 4), gamma in (0, 1/2]. */
bd_status bd_chernoff_tail(double theta, double gamma, double* tail);

typedef struct bd_lll_certificate {
    int feasible;          /* e * p * (D + 1) <= 1 */
    int theta_sufficient;  /* q >= 8 e max_degree / k */
    double event_prob;     /* q^-k, may underflow to 0 */
    double log_event_prob;
    uint64_t dependency_degree; /* saturates at UINT64_MAX */
    double log_dependency_degree;
} bd_lll_certificate;

bd_status bd_lll_check(uint64_t max_degree, uint64_t k, uint64_t q,
                       bd_lll_certificate* out);

/* ---- datasets ---- */

/* Generates from an INI model config; seed_override >= 0 replaces the file
 * seed. */
bd_status bd_dataset_generate(const char* config_path, int64_t seed_override,
                              bd_dataset** out);
bd_status bd_dataset_load_csv(const char* path, bd_dataset** out);
bd_status bd_dataset_save_csv(const bd_dataset* ds, const char* path);
bd_status bd_dataset_summary_text(const bd_dataset* ds, char** text);
uint32_t bd_dataset_size(const bd_dataset* ds);
uint32_t bd_dataset_dim(const bd_dataset* ds);
void bd_dataset_free(bd_dataset* ds);

/* ---- similarity graphs ---- */

/* bruteforce != 0 selects the quadratic reference construction. */
bd_status bd_graph_build(const bd_dataset* ds, double r_n, int bruteforce,
                         bd_graph** out);
bd_status bd_graph_stats_text(const bd_graph* g, char** text);
bd_status bd_graph_degree(const bd_graph* g, uint32_t v, uint32_t* degree);
/* Ascending neighbor indices of v. */
bd_status bd_graph_neighbors(const bd_graph* g, uint32_t v, uint32_t** items,
                             size_t* count);
bd_status bd_graph_export_edges_csv(const bd_graph* g, const char* path);
uint32_t bd_graph_max_degree(const bd_graph* g);
void bd_graph_free(bd_graph* g);

/* ---- batch decompositions ---- */

/* algo: greedy | lll | exact. order (greedy): natural | random | degree-desc.
 * theta and max_rounds drive the lll resampler (theta <= 0 and max_rounds ==
 * 0 pick defaults). Returns BD_INFEASIBLE when no valid decomposition can be
 * produced and BD_BUDGET_EXHAUSTED when the resampler ran out of rounds. */
bd_status bd_decompose(const bd_graph* g, const bd_dataset* ds, uint32_t k,
                       const char* algo, const char* order, double theta,
                       uint64_t seed, uint64_t max_rounds, bd_decomposition** out);
bd_status bd_decomposition_save_csv(const bd_decomposition* dec, const char* path);
bd_status bd_decomposition_load_csv(const char* path, uint32_t k,
                                    bd_decomposition** out);
uint32_t bd_decomposition_batches(const bd_decomposition* dec);
uint32_t bd_decomposition_k(const bd_decomposition* dec);
/* valid = 1 iff both decomposition conditions hold; report_text gets one
 * violation per line (empty when valid). */
bd_status bd_check_k_good(const bd_graph* g, const bd_dataset* ds,
                          const bd_decomposition* dec, int* valid, char** report_text);
bd_status bd_tau_lower_bound(const bd_graph* g, const bd_dataset* ds, uint32_t k,
                             uint32_t* bound);
void bd_decomposition_free(bd_decomposition* dec);

/* ---- similarity-bounded subsets ---- */

/* algo: direct | kway | exact. */
bd_status bd_subset_compute(const bd_graph* g, uint32_t k, const char* algo,
                            uint64_t seed, bd_subset** out);
bd_status bd_subset_save_csv(const bd_subset* s, const char* path);
bd_status bd_subset_load_csv(const char* path, bd_subset** out);
uint64_t bd_subset_size(const bd_subset* s);
uint32_t bd_subset_k(const bd_subset* s);
bd_status bd_check_similarity_budget(const bd_graph* g, const bd_subset* s, uint32_t k,
                                     int* ok, uint32_t* max_observed);
bd_status bd_nsim_upper_grid(const bd_dataset* ds, uint32_t k, double r_n,
                             uint64_t* bound);
void bd_subset_free(bd_subset* s);

/* ---- experiments ---- */

/* config_path may be NULL when preset is given (preset defaults), and preset
 * may be NULL when the config file names one. Writes records.jsonl under
 * out_dir, one JSON object per line, in deterministic (cell, trial) order. */
bd_status bd_experiment_run(const char* config_path, const char* preset,
                            const char* out_dir, unsigned jobs);
/* Aggregates every *.jsonl under records_dir into summary.txt / summary.csv
 * in out_dir and returns the text via summary_text when non-NULL. */
bd_status bd_report(const char* records_dir, const char* out_dir, char** summary_text);

void bd_string_free(char* text);
void bd_index_buffer_free(uint32_t* items);

#ifdef __cplusplus
}
#endif

#endif
