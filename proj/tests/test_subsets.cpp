#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "core/subsets.hpp"
#include "testutil.hpp"

using namespace bd;
using namespace bd::subsets;
using decomposition::Order;
using similarity::SimilarityGraph;
using testutil::make_points;

TEST_CASE("check_similarity_budget") {
    auto ds = testutil::clique(5);
    auto g = SimilarityGraph::build(ds, 0.1);

    auto empty = check_similarity_budget(g, std::vector<uint32_t>{}, 3);
    CHECK(empty.ok);
    CHECK(empty.max_observed == 0);

    // Full clique of size k+1 with budget k: observed k, not ok.
    std::vector<uint32_t> four{0, 1, 2, 3};
    auto over = check_similarity_budget(g, four, 3);
    CHECK_FALSE(over.ok);
    CHECK(over.max_observed == 3);
    CHECK(check_similarity_budget(g, four, 4).ok);

    CHECK_THROWS_AS(check_similarity_budget(g, std::vector<uint32_t>{0, 0}, 2), Error);
    CHECK_THROWS_AS(check_similarity_budget(g, std::vector<uint32_t>{9}, 2), Error);
}

TEST_CASE("greedy direct") {
    // Edgeless graph admits everyone.
    auto lonely = make_points(1, {{0.1}, {0.2}, {0.3}}, {0, 1, 2}, {0, 0, 0});
    auto gl = SimilarityGraph::build(lonely, 1.0);
    CHECK(nsim_greedy_direct(gl, 1).size == 3);

    // Clique with budget k admits exactly min(n, k).
    auto ds = testutil::clique(10);
    auto g = SimilarityGraph::build(ds, 0.1);
    for (uint32_t k : {1u, 3u, 7u, 10u, 12u}) {
        CHECK(nsim_greedy_direct(g, k).size == std::min<uint64_t>(10, k));
    }

    // k = 1 output is a maximal similarity-free set.
    auto inst = testutil::random_instance(606, 50, 200);
    auto gr = SimilarityGraph::build(inst.ds, inst.r);
    auto res = nsim_greedy_direct(gr, 1);
    CHECK(check_similarity_budget(gr, res.indices, 1).ok);
    std::vector<uint8_t> in(inst.ds.size(), 0);
    for (uint32_t v : res.indices) in[v] = 1;
    std::vector<uint32_t> scratch;
    for (uint32_t v = 0; v < inst.ds.size(); ++v) {
        if (in[v]) continue;
        scratch.clear();
        gr.neighbors_into(v, scratch);
        uint32_t picked_neighbors = 0;
        for (uint32_t u : scratch) picked_neighbors += in[u];
        CHECK(picked_neighbors >= 1);  // no admissible extension
    }
}

TEST_CASE("greedy kway") {
    auto inst = testutil::random_instance(607, 40, 160);
    auto g = SimilarityGraph::build(inst.ds, inst.r);

    // k = 1 coincides with the direct pass.
    auto direct = nsim_greedy_direct(g, 1);
    auto kway = nsim_greedy_kway(g, 1, 99);
    CHECK(kway.indices == direct.indices);

    // Clique: one representative per group.
    auto ds = testutil::clique(10);
    auto gc = SimilarityGraph::build(ds, 0.1);
    auto r3 = nsim_greedy_kway(gc, 3, 1);
    CHECK(r3.size == 3);
    CHECK(check_similarity_budget(gc, r3.indices, 3).ok);

    CHECK_THROWS_AS(nsim_greedy_kway(gc, 11, 1), Error);  // k > n
}

TEST_CASE("constructive methods always satisfy the budget") {
    for (uint64_t t = 0; t < 60; ++t) {
        auto inst = testutil::random_instance(70000 + t, 10, 300);
        auto g = SimilarityGraph::build(inst.ds, inst.r);
        for (uint32_t k : {1u, 2u, 5u}) {
            if (k > inst.ds.size()) continue;
            auto a = nsim_greedy_direct(g, k, Order::natural);
            auto b = nsim_greedy_direct(g, k, Order::random, t);
            auto c = nsim_greedy_kway(g, k, t);
            CHECK(check_similarity_budget(g, a.indices, k).ok);
            CHECK(check_similarity_budget(g, b.indices, k).ok);
            CHECK(check_similarity_budget(g, c.indices, k).ok);
        }
    }
}

TEST_CASE("grid upper bound") {
    // All points in one cell, one category, uncorrupted.
    auto ds = testutil::clique(10);
    for (uint32_t k : {1u, 3u, 20u}) {
        CHECK(nsim_upper_grid(ds, k, 0.1) == std::min<uint64_t>(10, k));
    }

    // Far-apart points: the bound cannot beat n.
    auto spread = make_points(1, {{0.05}, {0.25}, {0.45}, {0.65}, {0.85}},
                              std::vector<uint32_t>(5, 0), std::vector<uint8_t>(5, 0));
    CHECK(nsim_upper_grid(spread, 1, 0.01) == 5);

    // r_n = 0: only corrupted cliques constrain.
    auto mixed = make_points(1, {{0.1}, {0.2}, {0.3}, {0.4}}, {0, 0, 0, 1},
                             {1, 1, 1, 0});
    CHECK(nsim_upper_grid(mixed, 2, 0.0) == 3);  // min(3,2) corrupted + 1 clean
    CHECK(nsim_upper_grid(mixed, 1, 0.0) == 2);
}

TEST_CASE("exact search") {
    auto ds = testutil::clique(10);
    auto g = SimilarityGraph::build(ds, 0.1);
    auto r = nsim_exact(g, 3);
    CHECK(r.size == 3);
    CHECK(check_similarity_budget(g, r.indices, 3).ok);
    for (uint32_t k = 1; k <= 10; ++k) {
        CHECK(nsim_exact(g, k).size == std::min<uint64_t>(10, k));
    }

    auto lonely = make_points(1, {{0.1}, {0.2}, {0.3}, {0.4}, {0.5}, {0.6}, {0.7}, {0.8}},
                              {0, 1, 2, 3, 4, 5, 6, 7}, std::vector<uint8_t>(8, 0));
    auto gl = SimilarityGraph::build(lonely, 0.001);
    CHECK(nsim_exact(gl, 1).size == 8);
    CHECK(nsim_exact(gl, 5).size == 8);

    // Two disjoint cliques of 5 and 7, k = 2: two from each.
    auto twin = testutil::two_cliques(5, 7);
    auto gt = SimilarityGraph::build(twin, 0.05);
    CHECK(nsim_exact(gt, 2).size == 4);

    CHECK_THROWS_AS(nsim_exact(gt, 2, 6), Error);  // n > n_cap
}

TEST_CASE("sandwich and monotonicity at desk scale") {
    for (uint64_t t = 0; t < 60; ++t) {
        auto inst = testutil::random_instance(40000 + t, 4, 12, {0.0, 0.2, 0.5}, {1, 2, 4});
        auto g = SimilarityGraph::build(inst.ds, inst.r);
        for (uint32_t k : {1u, 2u, 3u}) {
            const auto exact = nsim_exact(g, k).size;
            CHECK(nsim_greedy_direct(g, k).size <= exact);
            if (k <= inst.ds.size()) {
                CHECK(nsim_greedy_kway(g, k, t).size <= exact);
            }
            CHECK(exact <= nsim_upper_grid(inst.ds, k, inst.r));
            CHECK(nsim_exact(g, k + 1).size >= exact);
        }
    }
}

TEST_CASE("subset csv round trip") {
    auto ds = testutil::clique(10);
    auto g = SimilarityGraph::build(ds, 0.1);
    auto r = nsim_exact(g, 3);
    auto path = (std::filesystem::temp_directory_path() / "bd_subset.csv").string();
    save_subset_csv(r, path);
    auto loaded = load_subset_csv(path);
    CHECK(loaded.indices == r.indices);
    CHECK(loaded.k == 3);
    CHECK(loaded.method == Method::exact);
    std::filesystem::remove(path);
}
