#include "batchdecomp.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "core/decomposition.hpp"
#include "core/harness.hpp"
#include "core/similarity.hpp"
#include "core/subsets.hpp"
#include "core/theory.hpp"

using bd::Error;
using bd::Status;

struct bd_dataset {
    bd::dataset::Dataset impl;
};
struct bd_graph {
    bd::similarity::SimilarityGraph impl;
};
struct bd_decomposition {
    bd::decomposition::BatchDecomposition impl;
};
struct bd_subset {
    bd::subsets::SubsetResult impl;
};

namespace {

thread_local std::string g_last_error;

bd_status to_status(Status s) { return static_cast<bd_status>(static_cast<int>(s)); }

template <typename Fn>
bd_status guarded(Fn&& fn) {
    try {
        fn();
        return BD_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return to_status(e.status());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return BD_INVALID_INPUT;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void need(bool cond, const char* what) {
    bd::require(cond, Status::invalid_input, what);
}

} // namespace

extern "C" {

const char* bd_status_name(bd_status status) {
    switch (status) {
        case BD_OK: return "ok";
        case BD_INFEASIBLE: return "infeasible";
        case BD_INVALID_INPUT: return "invalid-input";
        case BD_BUDGET_EXHAUSTED: return "budget-exhausted";
    }
    return "?";
}

const char* bd_last_error(void) { return g_last_error.c_str(); }

bd_status bd_delta_lambda(uint64_t n, uint32_t d, double r_n, double p0, double p_up,
                          double* delta, double* lambda) {
    return guarded([&] {
        need(delta && lambda, "null output pointer");
        bd::theory::TheoryParams p;
        p.n = n;
        p.d = d;
        p.r_n = r_n;
        p.p0 = p0;
        p.p_up = p_up;
        p.p_low = p_up;
        p.cat_size = static_cast<uint32_t>(std::max(1.0, 1.0 / p_up));
        p.p_low = std::min(p.p_low, 1.0 / p.cat_size);
        auto [dd, ll] = bd::theory::delta_lambda(p);
        *delta = dd;
        *lambda = ll;
    });
}

bd_status bd_zeta(uint64_t n, uint32_t d, double r_n, uint32_t k, double eps_up,
                  const double* cat_probs, size_t cat_count, double* zeta) {
    return guarded([&] {
        need(zeta && cat_probs && cat_count > 0, "null input");
        bd::theory::TheoryParams p;
        p.n = n;
        p.d = d;
        p.r_n = r_n;
        p.cat_size = static_cast<uint32_t>(cat_count);
        double up = 0.0, lo = 1.0;
        for (size_t i = 0; i < cat_count; ++i) {
            up = std::max(up, cat_probs[i]);
            lo = std::min(lo, cat_probs[i]);
        }
        p.p_up = up;
        p.p_low = std::max(lo, 1e-300);
        *zeta = bd::theory::zeta(p, k, eps_up, {cat_probs, cat_count});
    });
}

bd_status bd_chernoff_tail(double theta, double gamma, double* tail) {
    return guarded([&] {
        need(tail != nullptr, "null output pointer");
        *tail = bd::theory::chernoff_tail(theta, gamma);
    });
}

bd_status bd_lll_check(uint64_t max_degree, uint64_t k, uint64_t q,
                       bd_lll_certificate* out) {
    return guarded([&] {
        need(out != nullptr, "null output pointer");
        const auto cert = bd::theory::lll_certificate(max_degree, k, q);
        out->feasible = cert.feasible ? 1 : 0;
        out->theta_sufficient = cert.theta_sufficient ? 1 : 0;
        out->event_prob = cert.event_prob;
        out->log_event_prob = cert.log_event_prob;
        out->dependency_degree = cert.dependency_degree;
        out->log_dependency_degree = cert.log_dependency_degree;
    });
}

bd_status bd_dataset_generate(const char* config_path, int64_t seed_override,
                              bd_dataset** out) {
    return guarded([&] {
        need(config_path && out, "null input");
        auto cfg = bd::dataset::config_from_ini(bd::config::Ini::parse_file(config_path));
        if (seed_override >= 0) cfg.seed = static_cast<uint64_t>(seed_override);
        *out = new bd_dataset{bd::dataset::generate(cfg)};
    });
}

bd_status bd_dataset_load_csv(const char* path, bd_dataset** out) {
    return guarded([&] {
        need(path && out, "null input");
        *out = new bd_dataset{bd::dataset::load_csv(path)};
    });
}

bd_status bd_dataset_save_csv(const bd_dataset* ds, const char* path) {
    return guarded([&] {
        need(ds && path, "null input");
        bd::dataset::save_csv(ds->impl, path);
    });
}

bd_status bd_dataset_summary_text(const bd_dataset* ds, char** text) {
    return guarded([&] {
        need(ds && text, "null input");
        *text = dup_string(bd::dataset::summary(ds->impl).to_text());
    });
}

uint32_t bd_dataset_size(const bd_dataset* ds) { return ds ? ds->impl.size() : 0; }
uint32_t bd_dataset_dim(const bd_dataset* ds) { return ds ? ds->impl.dim() : 0; }
void bd_dataset_free(bd_dataset* ds) { delete ds; }

bd_status bd_graph_build(const bd_dataset* ds, double r_n, int bruteforce,
                         bd_graph** out) {
    return guarded([&] {
        need(ds && out, "null input");
        *out = new bd_graph{
            bruteforce ? bd::similarity::SimilarityGraph::build_bruteforce(ds->impl, r_n)
                       : bd::similarity::SimilarityGraph::build(ds->impl, r_n)};
    });
}

bd_status bd_graph_stats_text(const bd_graph* g, char** text) {
    return guarded([&] {
        need(g && text, "null input");
        const auto s = g->impl.degree_stats();
        std::ostringstream out;
        out << "n: " << g->impl.size() << "\n";
        out << "r_n: " << g->impl.radius() << "\n";
        out << "max_degree: " << s.max_degree << "\n";
        out << "argmax: " << s.argmax << "\n";
        out << "mean_degree: " << s.mean_degree << "\n";
        out << "degree_histogram:";
        for (uint64_t c : s.histogram) out << ' ' << c;
        out << "\n";
        *text = dup_string(out.str());
    });
}

bd_status bd_graph_degree(const bd_graph* g, uint32_t v, uint32_t* degree) {
    return guarded([&] {
        need(g && degree, "null input");
        need(v < g->impl.size(), "vertex out of range");
        *degree = g->impl.degree(v);
    });
}

bd_status bd_graph_neighbors(const bd_graph* g, uint32_t v, uint32_t** items,
                             size_t* count) {
    return guarded([&] {
        need(g && items && count, "null input");
        need(v < g->impl.size(), "vertex out of range");
        const auto nb = g->impl.neighbors(v);
        *count = nb.size();
        *items = static_cast<uint32_t*>(std::malloc(sizeof(uint32_t) * std::max<size_t>(1, nb.size())));
        std::memcpy(*items, nb.data(), sizeof(uint32_t) * nb.size());
    });
}

bd_status bd_graph_export_edges_csv(const bd_graph* g, const char* path) {
    return guarded([&] {
        need(g && path, "null input");
        g->impl.export_edges_csv(path);
    });
}

uint32_t bd_graph_max_degree(const bd_graph* g) { return g ? g->impl.max_degree() : 0; }
void bd_graph_free(bd_graph* g) { delete g; }

bd_status bd_decompose(const bd_graph* g, const bd_dataset* ds, uint32_t k,
                       const char* algo, const char* order, double theta,
                       uint64_t seed, uint64_t max_rounds, bd_decomposition** out) {
    return guarded([&] {
        need(g && ds && algo && out, "null input");
        const std::string a = algo;
        if (a == "greedy") {
            const auto o = bd::decomposition::order_from_string(order ? order : "natural");
            *out = new bd_decomposition{
                bd::decomposition::decompose_greedy(g->impl, ds->impl, k, o, seed)};
        } else if (a == "lll") {
            const double th = theta > 0.0 ? theta : 8.0 * M_E;
            const uint64_t rounds = max_rounds > 0 ? max_rounds : 50ull * ds->impl.size();
            auto outcome =
                bd::decomposition::decompose_lll(g->impl, ds->impl, k, th, seed, rounds);
            bd::require(outcome.dec.has_value(), Status::budget_exhausted,
                        "resampling budget exhausted after " +
                            std::to_string(outcome.rounds) + " rounds");
            *out = new bd_decomposition{std::move(*outcome.dec)};
        } else if (a == "exact") {
            auto [t, dec] = bd::decomposition::tau_exact(g->impl, ds->impl, k);
            (void)t;
            *out = new bd_decomposition{std::move(dec)};
        } else {
            bd::fail(Status::invalid_input, "algo must be greedy, lll or exact");
        }
    });
}

bd_status bd_decomposition_save_csv(const bd_decomposition* dec, const char* path) {
    return guarded([&] {
        need(dec && path, "null input");
        bd::decomposition::save_decomposition_csv(dec->impl, path);
    });
}

bd_status bd_decomposition_load_csv(const char* path, uint32_t k,
                                    bd_decomposition** out) {
    return guarded([&] {
        need(path && out, "null input");
        *out = new bd_decomposition{bd::decomposition::load_decomposition_csv(path, k)};
    });
}

uint32_t bd_decomposition_batches(const bd_decomposition* dec) {
    return dec ? dec->impl.size() : 0;
}

uint32_t bd_decomposition_k(const bd_decomposition* dec) { return dec ? dec->impl.k : 0; }

bd_status bd_check_k_good(const bd_graph* g, const bd_dataset* ds,
                          const bd_decomposition* dec, int* valid, char** report_text) {
    return guarded([&] {
        need(g && ds && dec && valid, "null input");
        const auto report = bd::decomposition::check_k_good(g->impl, ds->impl, dec->impl);
        *valid = report.valid ? 1 : 0;
        if (report_text) *report_text = dup_string(report.to_text());
    });
}

bd_status bd_tau_lower_bound(const bd_graph* g, const bd_dataset* ds, uint32_t k,
                             uint32_t* bound) {
    return guarded([&] {
        need(g && ds && bound, "null input");
        *bound = bd::decomposition::tau_lower_bound(g->impl, ds->impl, k);
    });
}

void bd_decomposition_free(bd_decomposition* dec) { delete dec; }

bd_status bd_subset_compute(const bd_graph* g, uint32_t k, const char* algo,
                            uint64_t seed, bd_subset** out) {
    return guarded([&] {
        need(g && algo && out, "null input");
        const std::string a = algo;
        if (a == "direct") {
            *out = new bd_subset{bd::subsets::nsim_greedy_direct(
                g->impl, k, bd::decomposition::Order::natural, seed)};
        } else if (a == "kway") {
            *out = new bd_subset{bd::subsets::nsim_greedy_kway(g->impl, k, seed)};
        } else if (a == "exact") {
            *out = new bd_subset{bd::subsets::nsim_exact(g->impl, k)};
        } else {
            bd::fail(Status::invalid_input, "algo must be direct, kway or exact");
        }
    });
}

bd_status bd_subset_save_csv(const bd_subset* s, const char* path) {
    return guarded([&] {
        need(s && path, "null input");
        bd::subsets::save_subset_csv(s->impl, path);
    });
}

bd_status bd_subset_load_csv(const char* path, bd_subset** out) {
    return guarded([&] {
        need(path && out, "null input");
        *out = new bd_subset{bd::subsets::load_subset_csv(path)};
    });
}

uint64_t bd_subset_size(const bd_subset* s) { return s ? s->impl.size : 0; }
uint32_t bd_subset_k(const bd_subset* s) { return s ? s->impl.k : 0; }

bd_status bd_check_similarity_budget(const bd_graph* g, const bd_subset* s, uint32_t k,
                                     int* ok, uint32_t* max_observed) {
    return guarded([&] {
        need(g && s && ok, "null input");
        const auto check = bd::subsets::check_similarity_budget(g->impl, s->impl.indices, k);
        *ok = check.ok ? 1 : 0;
        if (max_observed) *max_observed = check.max_observed;
    });
}

bd_status bd_nsim_upper_grid(const bd_dataset* ds, uint32_t k, double r_n,
                             uint64_t* bound) {
    return guarded([&] {
        need(ds && bound, "null input");
        *bound = bd::subsets::nsim_upper_grid(ds->impl, k, r_n);
    });
}

void bd_subset_free(bd_subset* s) { delete s; }

bd_status bd_experiment_run(const char* config_path, const char* preset,
                            const char* out_dir, unsigned jobs) {
    return guarded([&] {
        need(out_dir, "null output directory");
        need(config_path || preset, "need a config file or a preset name");
        bd::harness::ExperimentPlan plan;
        if (config_path) {
            plan = bd::harness::plan_from_ini(bd::config::Ini::parse_file(config_path),
                                              preset ? preset : "");
        } else {
            plan = bd::harness::ExperimentPlan::preset_defaults(
                bd::harness::preset_from_string(preset));
        }
        bd::harness::run_to_dir(plan, out_dir, jobs == 0 ? 1 : jobs);
    });
}

bd_status bd_report(const char* records_dir, const char* out_dir, char** summary_text) {
    return guarded([&] {
        need(records_dir && out_dir, "null input");
        const auto records = bd::harness::load_records_dir(records_dir);
        bd::harness::report_to_dir(records, out_dir);
        if (summary_text) {
            *summary_text = dup_string(bd::harness::report(records).text);
        }
    });
}

void bd_string_free(char* text) { std::free(text); }
void bd_index_buffer_free(uint32_t* items) { std::free(items); }

} // extern "C"
