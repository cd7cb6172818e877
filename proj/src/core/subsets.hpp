#ifndef BD_SUBSETS_HPP
#define BD_SUBSETS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/decomposition.hpp"
#include "core/similarity.hpp"

namespace bd::subsets {

enum class Method { greedy_direct, greedy_kway, exact, grid_upper };

std::string method_name(Method m);

// An index set whose induced similarity degree stays below k, plus how it was
// obtained. grid_upper results carry no indices (certificate only).
struct SubsetResult {
    uint32_t k = 1;
    std::vector<uint32_t> indices;  // ascending
    uint64_t size = 0;
    Method method = Method::greedy_direct;
};

struct BudgetCheck {
    bool ok = false;
    uint32_t max_observed = 0;  // largest induced degree
};

BudgetCheck check_similarity_budget(const similarity::SimilarityGraph& g,
                                    std::span<const uint32_t> indices, uint32_t k);

// Single pass in the given order; a vertex joins when it has at most k-1
// admitted neighbors and joining pushes none of them over the budget.
SubsetResult nsim_greedy_direct(const similarity::SimilarityGraph& g, uint32_t k,
                                decomposition::Order order = decomposition::Order::natural,
                                uint64_t seed = 0);

// Splits the indices into k near-equal groups (round-robin over a seeded
// shuffle; leftovers are kept, not discarded), takes a similarity-free set in
// each group, then filters the union through the budget-k admission pass so
// the result is always valid.
SubsetResult nsim_greedy_kway(const similarity::SimilarityGraph& g, uint32_t k,
                              uint64_t seed);

// Counting upper bound: corrupted points of one category are pairwise
// similar, as are uncorrupted points sharing a cell of side r_n / sqrt(4d),
// so each such group contributes at most k. With r_n = 0 only the corrupted
// cliques constrain.
uint64_t nsim_upper_grid(const dataset::Dataset& ds, uint32_t k, double r_n);

// Exact maximum via subset search with pruning; desk scale only.
SubsetResult nsim_exact(const similarity::SimilarityGraph& g, uint32_t k,
                        uint32_t n_cap = 14);

void save_subset_csv(const SubsetResult& s, const std::string& path);
SubsetResult load_subset_csv(const std::string& path);

} // namespace bd::subsets

#endif
