#ifndef BD_DECOMPOSITION_HPP
#define BD_DECOMPOSITION_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/similarity.hpp"

namespace bd::decomposition {

// Ordered disjoint batches covering 0..n-1, with the similarity budget k the
// decomposition was built for. Batches are never empty.
struct BatchDecomposition {
    uint32_t k = 1;
    std::vector<std::vector<uint32_t>> batches;

    uint32_t size() const { return static_cast<uint32_t>(batches.size()); }
    std::vector<uint32_t> batch_of(uint32_t n) const;  // vertex -> batch id
};

enum class ViolationKind { no_uncorrupted, similarity_budget };

struct Violation {
    ViolationKind kind;
    uint32_t batch = 0;
    std::optional<uint32_t> vertex;
    uint64_t observed = 0;
};

struct ValidityReport {
    bool valid = true;
    std::vector<Violation> violations;
    std::string to_text() const;  // one violation per line
};

// Checks both conditions of a k-good decomposition: every batch holds an
// uncorrupted index and every vertex has at most k-1 within-batch neighbors.
// Structural malformation (not a disjoint cover, empty batch) throws.
ValidityReport check_k_good(const similarity::SimilarityGraph& g,
                            const dataset::Dataset& ds, const BatchDecomposition& dec);

enum class Order { natural, random, degree_desc };

Order order_from_string(const std::string& name);

// First-fit: uncorrupted points first (each new batch is opened by one), then
// corrupted points into the lowest batch that keeps everyone within budget.
// Throws infeasible when no uncorrupted point exists or a corrupted point
// cannot be placed.
BatchDecomposition decompose_greedy(const similarity::SimilarityGraph& g,
                                    const dataset::Dataset& ds, uint32_t k,
                                    Order order = Order::natural, uint64_t seed = 0);

struct LllOutcome {
    std::optional<BatchDecomposition> dec;  // empty when the round budget ran out
    uint64_t rounds = 0;                    // violated events fixed (resamples + repairs)
    uint64_t repairs = 0;                   // no-uncorrupted-batch repair steps
    uint32_t q = 0;                         // batch count of the random assignment
};

// Random assignment into q = ceil(theta * max(1, max_degree) / k) batches,
// then resample violated events one at a time: a vertex with >= k
// within-batch neighbors has its batch id and those of k offending neighbors
// redrawn; a non-empty batch with no uncorrupted member pulls one uniformly
// chosen uncorrupted point (repair, counted separately). Deterministic given
// seed; lexicographically first violated event each round.
LllOutcome decompose_lll(const similarity::SimilarityGraph& g,
                         const dataset::Dataset& ds, uint32_t k, double theta,
                         uint64_t seed, uint64_t max_rounds);

// Exact minimum batch count via branch and bound over set partitions
// (point 0 opens batch 0; a new batch is always opened by the lowest
// unassigned index). Desk scale only.
std::pair<uint32_t, BatchDecomposition> tau_exact(const similarity::SimilarityGraph& g,
                                                  const dataset::Dataset& ds, uint32_t k,
                                                  uint32_t n_cap = 14);

// Pigeonhole bound max over cheap pairwise-similar witness sets: per-category
// corrupted sets and per (cell, category) uncorrupted sets with cell side
// r_n / sqrt(4d). Always <= tau_k.
uint32_t tau_lower_bound(const similarity::SimilarityGraph& g,
                         const dataset::Dataset& ds, uint32_t k);

void save_decomposition_csv(const BatchDecomposition& dec, const std::string& path);
BatchDecomposition load_decomposition_csv(const std::string& path, uint32_t k);

} // namespace bd::decomposition

#endif
