#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "batchdecomp.h"

namespace {

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string write_file(const std::string& name, const std::string& content) {
    auto p = tmp_path(name);
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p;
}

std::string clique_csv(int n) {
    std::string s = "idx,corrupted,y,x0\n";
    for (int i = 0; i < n; ++i) {
        s += std::to_string(i) + ",0,0,0." + std::to_string(512 + i) + "\n";
    }
    return s;
}

} // namespace

TEST_CASE("status names and theory calls") {
    CHECK(std::strcmp(bd_status_name(BD_OK), "ok") == 0);
    CHECK(std::strcmp(bd_status_name(BD_INFEASIBLE), "infeasible") == 0);

    double delta = 0.0, lambda = 0.0;
    CHECK(bd_delta_lambda(1000, 2, 0.1, 0.0, 0.1, &delta, &lambda) == BD_OK);
    CHECK(delta == doctest::Approx(1.0));
    CHECK(delta == lambda);

    double tail = 0.0;
    CHECK(bd_chernoff_tail(0.0, 0.5, &tail) == BD_OK);
    CHECK(tail == 2.0);
    CHECK(bd_chernoff_tail(1.0, 0.9, &tail) == BD_INVALID_INPUT);
    CHECK(std::strlen(bd_last_error()) > 0);

    double probs[2] = {0.5, 0.5};
    double z = 0.0;
    CHECK(bd_zeta(100, 2, 0.0, 1, 1.0, probs, 2, &z) == BD_OK);
    CHECK(z == 1.0);

    bd_lll_certificate cert;
    CHECK(bd_lll_check(1, 1, 4, &cert) == BD_OK);
    CHECK(cert.feasible == 0);
    CHECK(cert.event_prob == doctest::Approx(0.25));
    CHECK(bd_lll_check(1, 1, 64, &cert) == BD_OK);
    CHECK(cert.feasible == 1);
    CHECK(bd_lll_check(1, 5, 4, &cert) == BD_INVALID_INPUT);
}

TEST_CASE("dataset generate, save, load, summary") {
    auto cfg = write_file("bd_capi_cfg.ini",
                          "[model]\nn = 64\nd = 2\nr_n = 0.1\np0 = 0.25\n"
                          "p0_means = prob_corrupted\n"
                          "[categorical]\nkind = uniform\ncat_size = 4\n"
                          "[rng]\nseed = 7\n");
    bd_dataset* ds = nullptr;
    REQUIRE(bd_dataset_generate(cfg.c_str(), -1, &ds) == BD_OK);
    CHECK(bd_dataset_size(ds) == 64);
    CHECK(bd_dataset_dim(ds) == 2);

    auto csv = tmp_path("bd_capi_ds.csv");
    REQUIRE(bd_dataset_save_csv(ds, csv.c_str()) == BD_OK);
    bd_dataset* ds2 = nullptr;
    REQUIRE(bd_dataset_load_csv(csv.c_str(), &ds2) == BD_OK);
    CHECK(bd_dataset_size(ds2) == 64);

    char* text = nullptr;
    REQUIRE(bd_dataset_summary_text(ds, &text) == BD_OK);
    CHECK(std::string(text).find("n: 64") != std::string::npos);
    bd_string_free(text);

    bd_dataset_free(ds);
    bd_dataset_free(ds2);
    std::filesystem::remove(cfg);
    std::filesystem::remove(csv);

    bd_dataset* missing = nullptr;
    CHECK(bd_dataset_generate("/no/such/file.ini", -1, &missing) == BD_INVALID_INPUT);
    CHECK(missing == nullptr);
}

TEST_CASE("graph build and queries match the reference build") {
    auto csv = write_file("bd_capi_clique.csv", clique_csv(10));
    bd_dataset* ds = nullptr;
    REQUIRE(bd_dataset_load_csv(csv.c_str(), &ds) == BD_OK);

    bd_graph* fast = nullptr;
    bd_graph* slow = nullptr;
    REQUIRE(bd_graph_build(ds, 0.1, 0, &fast) == BD_OK);
    REQUIRE(bd_graph_build(ds, 0.1, 1, &slow) == BD_OK);
    CHECK(bd_graph_max_degree(fast) == 9);
    CHECK(bd_graph_max_degree(slow) == 9);

    for (uint32_t v = 0; v < 10; ++v) {
        uint32_t deg = 0;
        REQUIRE(bd_graph_degree(fast, v, &deg) == BD_OK);
        CHECK(deg == 9);
        uint32_t* a = nullptr;
        uint32_t* b = nullptr;
        size_t an = 0, bn = 0;
        REQUIRE(bd_graph_neighbors(fast, v, &a, &an) == BD_OK);
        REQUIRE(bd_graph_neighbors(slow, v, &b, &bn) == BD_OK);
        CHECK(an == bn);
        CHECK(std::memcmp(a, b, sizeof(uint32_t) * an) == 0);
        bd_index_buffer_free(a);
        bd_index_buffer_free(b);
    }

    char* stats = nullptr;
    REQUIRE(bd_graph_stats_text(fast, &stats) == BD_OK);
    CHECK(std::string(stats).find("max_degree: 9") != std::string::npos);
    bd_string_free(stats);

    uint32_t bad = 0;
    CHECK(bd_graph_degree(fast, 99, &bad) == BD_INVALID_INPUT);

    bd_graph_free(fast);
    bd_graph_free(slow);
    bd_dataset_free(ds);
    std::filesystem::remove(csv);
}

TEST_CASE("decomposition workflow through the C surface") {
    auto csv = write_file("bd_capi_clique2.csv", clique_csv(10));
    bd_dataset* ds = nullptr;
    REQUIRE(bd_dataset_load_csv(csv.c_str(), &ds) == BD_OK);
    bd_graph* g = nullptr;
    REQUIRE(bd_graph_build(ds, 0.1, 0, &g) == BD_OK);

    bd_decomposition* dec = nullptr;
    REQUIRE(bd_decompose(g, ds, 3, "greedy", "natural", 0.0, 0, 0, &dec) == BD_OK);
    CHECK(bd_decomposition_batches(dec) == 4);
    CHECK(bd_decomposition_k(dec) == 3);

    int valid = 0;
    char* report = nullptr;
    REQUIRE(bd_check_k_good(g, ds, dec, &valid, &report) == BD_OK);
    CHECK(valid == 1);
    CHECK(std::strlen(report) == 0);
    bd_string_free(report);

    auto dec_csv = tmp_path("bd_capi_dec.csv");
    REQUIRE(bd_decomposition_save_csv(dec, dec_csv.c_str()) == BD_OK);
    bd_decomposition* loaded = nullptr;
    REQUIRE(bd_decomposition_load_csv(dec_csv.c_str(), 3, &loaded) == BD_OK);
    CHECK(bd_decomposition_batches(loaded) == 4);
    bd_decomposition_free(loaded);
    bd_decomposition_free(dec);

    uint32_t bound = 0;
    REQUIRE(bd_tau_lower_bound(g, ds, 3, &bound) == BD_OK);
    CHECK(bound == 4);

    bd_decomposition* exact = nullptr;
    REQUIRE(bd_decompose(g, ds, 3, "exact", nullptr, 0.0, 0, 0, &exact) == BD_OK);
    CHECK(bd_decomposition_batches(exact) == 4);
    bd_decomposition_free(exact);

    // theta forcing q = 1 can never fix a violated pair: budget exhausted.
    bd_decomposition* lll = nullptr;
    CHECK(bd_decompose(g, ds, 1, "lll", nullptr, 0.1, 5, 1, &lll) == BD_BUDGET_EXHAUSTED);
    CHECK(lll == nullptr);

    CHECK(bd_decompose(g, ds, 3, "bogus", nullptr, 0.0, 0, 0, &lll) == BD_INVALID_INPUT);

    bd_graph_free(g);
    bd_dataset_free(ds);
    std::filesystem::remove(csv);
    std::filesystem::remove(dec_csv);
}

TEST_CASE("infeasible decomposition surfaces as BD_INFEASIBLE") {
    auto csv = write_file("bd_capi_corrupt.csv", "idx,corrupted,y,x0\n0,1,0,\n1,1,0,\n");
    bd_dataset* ds = nullptr;
    REQUIRE(bd_dataset_load_csv(csv.c_str(), &ds) == BD_OK);
    bd_graph* g = nullptr;
    REQUIRE(bd_graph_build(ds, 0.1, 0, &g) == BD_OK);
    bd_decomposition* dec = nullptr;
    CHECK(bd_decompose(g, ds, 2, "greedy", "natural", 0.0, 0, 0, &dec) == BD_INFEASIBLE);
    CHECK(std::string(bd_last_error()).find("uncorrupted") != std::string::npos);
    bd_graph_free(g);
    bd_dataset_free(ds);
    std::filesystem::remove(csv);
}

TEST_CASE("subset workflow through the C surface") {
    auto csv = write_file("bd_capi_clique3.csv", clique_csv(10));
    bd_dataset* ds = nullptr;
    REQUIRE(bd_dataset_load_csv(csv.c_str(), &ds) == BD_OK);
    bd_graph* g = nullptr;
    REQUIRE(bd_graph_build(ds, 0.1, 0, &g) == BD_OK);

    for (const char* algo : {"direct", "kway", "exact"}) {
        bd_subset* s = nullptr;
        REQUIRE(bd_subset_compute(g, 3, algo, 11, &s) == BD_OK);
        CHECK(bd_subset_size(s) == 3);
        int ok = 0;
        uint32_t observed = 0;
        REQUIRE(bd_check_similarity_budget(g, s, 3, &ok, &observed) == BD_OK);
        CHECK(ok == 1);
        CHECK(observed <= 2);
        bd_subset_free(s);
    }

    bd_subset* s = nullptr;
    REQUIRE(bd_subset_compute(g, 2, "exact", 0, &s) == BD_OK);
    auto sub_csv = tmp_path("bd_capi_sub.csv");
    REQUIRE(bd_subset_save_csv(s, sub_csv.c_str()) == BD_OK);
    bd_subset* loaded = nullptr;
    REQUIRE(bd_subset_load_csv(sub_csv.c_str(), &loaded) == BD_OK);
    CHECK(bd_subset_size(loaded) == bd_subset_size(s));
    CHECK(bd_subset_k(loaded) == 2);
    bd_subset_free(loaded);
    bd_subset_free(s);

    uint64_t bound = 0;
    REQUIRE(bd_nsim_upper_grid(ds, 3, 0.1, &bound) == BD_OK);
    CHECK(bound == 3);

    bd_graph_free(g);
    bd_dataset_free(ds);
    std::filesystem::remove(csv);
    std::filesystem::remove(sub_csv);
}

TEST_CASE("experiment run and report through the C surface") {
    auto cfg = write_file("bd_capi_exp.ini",
                          "[experiment]\npreset = variance-nsim\nn_list = 8\n"
                          "k_list = 1\ntrials = 4\nbase_seed = 5\n");
    const auto out_dir = tmp_path("bd_capi_expdir");
    std::filesystem::remove_all(out_dir);
    REQUIRE(bd_experiment_run(cfg.c_str(), nullptr, out_dir.c_str(), 2) == BD_OK);
    CHECK(std::filesystem::exists(out_dir + "/records.jsonl"));

    char* text = nullptr;
    REQUIRE(bd_report(out_dir.c_str(), out_dir.c_str(), &text) == BD_OK);
    CHECK(std::string(text).find("variance-nsim") != std::string::npos);
    bd_string_free(text);
    CHECK(std::filesystem::exists(out_dir + "/summary.txt"));
    CHECK(std::filesystem::exists(out_dir + "/summary.csv"));

    // Preset without config file.
    const auto out2 = tmp_path("bd_capi_expdir2");
    std::filesystem::remove_all(out2);
    auto mini = write_file("bd_capi_exp2.ini",
                           "[experiment]\npreset = variance-nsim\nn_list = 8\n"
                           "k_list = 1\ntrials = 2\n");
    REQUIRE(bd_experiment_run(mini.c_str(), "variance-nsim", out2.c_str(), 1) == BD_OK);

    CHECK(bd_experiment_run(nullptr, nullptr, out_dir.c_str(), 1) == BD_INVALID_INPUT);
    CHECK(bd_report("/no/such/dir", out_dir.c_str(), nullptr) == BD_INVALID_INPUT);

    std::filesystem::remove_all(out_dir);
    std::filesystem::remove_all(out2);
    std::filesystem::remove(cfg);
    std::filesystem::remove(mini);
}
