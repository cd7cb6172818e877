// Command-line front end. Everything goes through the shared-library C API;
// exit codes mirror bd_status (0 ok, 1 infeasible, 2 invalid input, 3 budget
// exhausted).

#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "batchdecomp.h"

namespace {

int fail_with(bd_status status) {
    std::fprintf(stderr, "error (%s): %s\n", bd_status_name(status), bd_last_error());
    return static_cast<int>(status);
}

struct DatasetHandle {
    bd_dataset* ds = nullptr;
    ~DatasetHandle() { bd_dataset_free(ds); }
};

struct GraphHandle {
    bd_graph* g = nullptr;
    ~GraphHandle() { bd_graph_free(g); }
};

int load_dataset(const std::string& path, DatasetHandle& out) {
    const bd_status s = bd_dataset_load_csv(path.c_str(), &out.ds);
    return s == BD_OK ? 0 : fail_with(s);
}

int build_graph(const DatasetHandle& ds, double r_n, bool bruteforce, GraphHandle& out) {
    const bd_status s = bd_graph_build(ds.ds, r_n, bruteforce ? 1 : 0, &out.g);
    return s == BD_OK ? 0 : fail_with(s);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"random-dataset similarity batching toolkit"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a dataset from a model config");
    std::string gen_config, gen_out;
    int64_t gen_seed = -1;
    gen->add_option("--config", gen_config, "model config file")->required();
    gen->add_option("--out", gen_out, "output dataset CSV")->required();
    gen->add_option("--seed", gen_seed, "override the config seed");
    gen->callback([&]() {
        bd_dataset* ds = nullptr;
        bd_status s = bd_dataset_generate(gen_config.c_str(), gen_seed, &ds);
        if (s != BD_OK) throw CLI::RuntimeError(fail_with(s));
        DatasetHandle h{ds};
        if ((s = bd_dataset_save_csv(ds, gen_out.c_str())) != BD_OK) {
            throw CLI::RuntimeError(fail_with(s));
        }
        char* text = nullptr;
        if ((s = bd_dataset_summary_text(ds, &text)) != BD_OK) {
            throw CLI::RuntimeError(fail_with(s));
        }
        std::fputs(text, stdout);
        bd_string_free(text);
    });

    // graph
    auto* graph = app.add_subcommand("graph", "build a similarity graph and print stats");
    std::string graph_data, graph_edges;
    double graph_r = 0.0;
    bool graph_brute = false;
    graph->add_option("--data", graph_data, "dataset CSV")->required();
    graph->add_option("--r", graph_r, "similarity radius r_n")->required();
    graph->add_flag("--bruteforce", graph_brute, "use the quadratic reference build");
    graph->add_option("--edges", graph_edges, "export edge list CSV (small graphs)");
    graph->callback([&]() {
        DatasetHandle ds;
        if (int rc = load_dataset(graph_data, ds)) throw CLI::RuntimeError(rc);
        GraphHandle g;
        if (int rc = build_graph(ds, graph_r, graph_brute, g)) throw CLI::RuntimeError(rc);
        char* text = nullptr;
        bd_status s = bd_graph_stats_text(g.g, &text);
        if (s != BD_OK) throw CLI::RuntimeError(fail_with(s));
        std::fputs(text, stdout);
        bd_string_free(text);
        if (!graph_edges.empty() &&
            (s = bd_graph_export_edges_csv(g.g, graph_edges.c_str())) != BD_OK) {
            throw CLI::RuntimeError(fail_with(s));
        }
    });

    // decompose
    auto* dec = app.add_subcommand("decompose", "build a batch decomposition");
    std::string dec_data, dec_algo = "greedy", dec_order = "natural", dec_out;
    double dec_r = 0.0, dec_theta = 0.0;
    uint32_t dec_k = 1;
    uint64_t dec_seed = 0, dec_rounds = 0;
    dec->add_option("--data", dec_data, "dataset CSV")->required();
    dec->add_option("--r", dec_r, "similarity radius r_n")->required();
    dec->add_option("--k", dec_k, "similarity budget k")->required();
    dec->add_option("--algo", dec_algo, "greedy | lll | exact");
    dec->add_option("--order", dec_order, "natural | random | degree-desc");
    dec->add_option("--theta", dec_theta, "lll oversampling constant (0 = default)");
    dec->add_option("--seed", dec_seed, "random seed");
    dec->add_option("--max-rounds", dec_rounds, "lll round budget (0 = 50n)");
    dec->add_option("--out", dec_out, "output decomposition CSV")->required();
    dec->callback([&]() {
        DatasetHandle ds;
        if (int rc = load_dataset(dec_data, ds)) throw CLI::RuntimeError(rc);
        GraphHandle g;
        if (int rc = build_graph(ds, dec_r, false, g)) throw CLI::RuntimeError(rc);
        bd_decomposition* out = nullptr;
        bd_status s = bd_decompose(g.g, ds.ds, dec_k, dec_algo.c_str(), dec_order.c_str(),
                                   dec_theta, dec_seed, dec_rounds, &out);
        if (s != BD_OK) throw CLI::RuntimeError(fail_with(s));
        s = bd_decomposition_save_csv(out, dec_out.c_str());
        if (s != BD_OK) {
            bd_decomposition_free(out);
            throw CLI::RuntimeError(fail_with(s));
        }
        std::printf("batches: %u\n", bd_decomposition_batches(out));
        int valid = 0;
        s = bd_check_k_good(g.g, ds.ds, out, &valid, nullptr);
        bd_decomposition_free(out);
        if (s != BD_OK) throw CLI::RuntimeError(fail_with(s));
        std::printf("valid: %s\n", valid ? "yes" : "no");
    });

    // subset
    auto* sub = app.add_subcommand("subset", "extract a similarity-bounded subset");
    std::string sub_data, sub_algo = "direct", sub_out;
    double sub_r = 0.0;
    uint32_t sub_k = 1;
    uint64_t sub_seed = 0;
    sub->add_option("--data", sub_data, "dataset CSV")->required();
    sub->add_option("--r", sub_r, "similarity radius r_n")->required();
    sub->add_option("--k", sub_k, "similarity budget k")->required();
    sub->add_option("--algo", sub_algo, "direct | kway | exact | upper");
    sub->add_option("--seed", sub_seed, "random seed");
    sub->add_option("--out", sub_out, "output subset CSV (constructive algos)");
    sub->callback([&]() {
        DatasetHandle ds;
        if (int rc = load_dataset(sub_data, ds)) throw CLI::RuntimeError(rc);
        if (sub_algo == "upper") {
            uint64_t bound = 0;
            bd_status s = bd_nsim_upper_grid(ds.ds, sub_k, sub_r, &bound);
            if (s != BD_OK) throw CLI::RuntimeError(fail_with(s));
            std::printf("upper_bound: %llu\n", static_cast<unsigned long long>(bound));
            return;
        }
        GraphHandle g;
        if (int rc = build_graph(ds, sub_r, false, g)) throw CLI::RuntimeError(rc);
        bd_subset* out = nullptr;
        bd_status s = bd_subset_compute(g.g, sub_k, sub_algo.c_str(), sub_seed, &out);
        if (s != BD_OK) throw CLI::RuntimeError(fail_with(s));
        std::printf("size: %llu\n", static_cast<unsigned long long>(bd_subset_size(out)));
        if (!sub_out.empty() && (s = bd_subset_save_csv(out, sub_out.c_str())) != BD_OK) {
            bd_subset_free(out);
            throw CLI::RuntimeError(fail_with(s));
        }
        bd_subset_free(out);
    });

    // verify
    auto* ver = app.add_subcommand("verify", "check decomposition / subset files");
    std::string ver_data, ver_dec, ver_sub;
    double ver_r = 0.0;
    uint32_t ver_k = 0;
    ver->add_option("--data", ver_data, "dataset CSV")->required();
    ver->add_option("--r", ver_r, "similarity radius r_n")->required();
    ver->add_option("--decomposition", ver_dec, "decomposition CSV to check");
    ver->add_option("--subset", ver_sub, "subset CSV to check");
    ver->add_option("--k", ver_k, "similarity budget (required for decompositions)");
    ver->callback([&]() {
        if (ver_dec.empty() && ver_sub.empty()) {
            std::fprintf(stderr, "error: nothing to verify\n");
            throw CLI::RuntimeError(static_cast<int>(BD_INVALID_INPUT));
        }
        DatasetHandle ds;
        if (int rc = load_dataset(ver_data, ds)) throw CLI::RuntimeError(rc);
        GraphHandle g;
        if (int rc = build_graph(ds, ver_r, false, g)) throw CLI::RuntimeError(rc);
        bool all_valid = true;
        if (!ver_dec.empty()) {
            if (ver_k == 0) {
                std::fprintf(stderr, "error: --k is required with --decomposition\n");
                throw CLI::RuntimeError(static_cast<int>(BD_INVALID_INPUT));
            }
            bd_decomposition* dec_h = nullptr;
            bd_status s = bd_decomposition_load_csv(ver_dec.c_str(), ver_k, &dec_h);
            if (s != BD_OK) throw CLI::RuntimeError(fail_with(s));
            int valid = 0;
            char* text = nullptr;
            s = bd_check_k_good(g.g, ds.ds, dec_h, &valid, &text);
            bd_decomposition_free(dec_h);
            if (s != BD_OK) throw CLI::RuntimeError(fail_with(s));
            std::fputs(text, stdout);
            bd_string_free(text);
            std::printf("decomposition: %s\n", valid ? "valid" : "invalid");
            all_valid = all_valid && valid;
        }
        if (!ver_sub.empty()) {
            bd_subset* sub_h = nullptr;
            bd_status s = bd_subset_load_csv(ver_sub.c_str(), &sub_h);
            if (s != BD_OK) throw CLI::RuntimeError(fail_with(s));
            const uint32_t k = ver_k > 0 ? ver_k : bd_subset_k(sub_h);
            int ok = 0;
            uint32_t observed = 0;
            s = bd_check_similarity_budget(g.g, sub_h, k, &ok, &observed);
            bd_subset_free(sub_h);
            if (s != BD_OK) throw CLI::RuntimeError(fail_with(s));
            std::printf("subset: %s (max within-subset degree %u, budget %u)\n",
                        ok ? "valid" : "invalid", observed, k);
            all_valid = all_valid && ok;
        }
        if (!all_valid) throw CLI::RuntimeError(static_cast<int>(BD_INFEASIBLE));
    });

    // experiment
    auto* exp = app.add_subcommand("experiment", "run a Monte Carlo sweep");
    std::string exp_config, exp_preset, exp_out;
    unsigned exp_jobs = 1;
    exp->add_option("--config", exp_config, "experiment config file");
    exp->add_option("--preset", exp_preset,
                    "degree-scaling | tau-tradeoff | nsim-bracket | variance-nsim | "
                    "variance-tau | lll-termination");
    exp->add_option("--out", exp_out, "output directory (records.jsonl)")->required();
    exp->add_option("--jobs", exp_jobs, "worker threads");
    exp->callback([&]() {
        const bd_status s = bd_experiment_run(exp_config.empty() ? nullptr : exp_config.c_str(),
                                              exp_preset.empty() ? nullptr : exp_preset.c_str(),
                                              exp_out.c_str(), exp_jobs);
        if (s != BD_OK) throw CLI::RuntimeError(fail_with(s));
        std::printf("records written to %s/records.jsonl\n", exp_out.c_str());
    });

    // report
    auto* rep = app.add_subcommand("report", "aggregate experiment records");
    std::string rep_in, rep_out;
    rep->add_option("--in", rep_in, "directory holding *.jsonl records")->required();
    rep->add_option("--out", rep_out, "output directory (defaults to --in)");
    rep->callback([&]() {
        const std::string out_dir = rep_out.empty() ? rep_in : rep_out;
        char* text = nullptr;
        const bd_status s = bd_report(rep_in.c_str(), out_dir.c_str(), &text);
        if (s != BD_OK) throw CLI::RuntimeError(fail_with(s));
        std::fputs(text, stdout);
        bd_string_free(text);
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}
