#ifndef BD_SIMILARITY_HPP
#define BD_SIMILARITY_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/dataset.hpp"

namespace bd::similarity {

// Two points are similar when their categories match and either both are
// uncorrupted within strict distance r_n, or at least one is corrupted.
bool is_similar(const dataset::Dataset& ds, uint32_t i, uint32_t j, double r_n);

struct DegreeStats {
    uint32_t max_degree = 0;
    uint32_t argmax = 0;  // lowest index attaining the maximum
    double mean_degree = 0.0;
    std::vector<uint64_t> histogram;  // histogram[deg] = #vertices
};

// Queryable similarity structure. Corrupted points form per-category cliques
// kept implicit (their degrees come from category counts, never from edge
// enumeration); geometric edges are answered from a hash grid with cell side
// r_n, scanning the 3^d adjacent cells. The graph owns copies of what it
// needs, so it stays valid after the dataset is gone.
class SimilarityGraph {
public:
    static SimilarityGraph build(const dataset::Dataset& ds, double r_n);
    // O(n^2) oracle with the same query contract.
    static SimilarityGraph build_bruteforce(const dataset::Dataset& ds, double r_n);

    uint32_t size() const { return n_; }
    double radius() const { return r_; }
    uint32_t cat_size() const { return static_cast<uint32_t>(cat_indices_.size()); }

    uint32_t category(uint32_t v) const { return ys_[v]; }
    bool corrupted(uint32_t v) const { return corrupted_[v] != 0; }
    uint32_t category_total(uint32_t c) const {
        return static_cast<uint32_t>(cat_indices_[c].size());
    }
    uint32_t category_corrupted(uint32_t c) const { return cat_corrupted_[c]; }

    uint32_t degree(uint32_t v) const { return degrees_[v]; }
    uint32_t max_degree() const;

    // Ascending neighbor indices.
    std::vector<uint32_t> neighbors(uint32_t v) const;
    // Appends neighbors in unspecified order; `out` is not cleared, callers
    // reuse it as a scratch buffer.
    void neighbors_into(uint32_t v, std::vector<uint32_t>& out) const;

    DegreeStats degree_stats() const;

    // Debug-only edge list (u < v per line); rejected for large graphs.
    void export_edges_csv(const std::string& path) const;

private:
    SimilarityGraph() = default;
    void init_common(const dataset::Dataset& ds, double r_n);

    uint32_t n_ = 0;
    double r_ = 0.0;
    double r2_ = 0.0;
    uint32_t d_ = 0;
    std::vector<double> xs_;
    std::vector<uint32_t> ys_;
    std::vector<uint8_t> corrupted_;
    std::vector<uint32_t> degrees_;

    std::vector<std::vector<uint32_t>> cat_indices_;    // all points per category
    std::vector<std::vector<uint32_t>> cat_corr_list_;  // corrupted points per category
    std::vector<uint32_t> cat_corrupted_;

    // Hashed (category, cell) -> uncorrupted points. Hash collisions only add
    // candidates; the distance check keeps answers exact.
    bool gridded_ = false;
    std::unordered_map<uint64_t, std::vector<uint32_t>> grid_;

    bool explicit_ = false;
    std::vector<std::vector<uint32_t>> adj_;

    uint64_t cell_key(uint32_t cat, const double* x) const;
    template <typename Fn>
    void scan_geometric(uint32_t v, Fn&& fn) const;
};

} // namespace bd::similarity

#endif
