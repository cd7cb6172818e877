#include "core/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace bd::similarity {

namespace {

double dist2(const double* a, const double* b, uint32_t d) {
    double s = 0.0;
    for (uint32_t j = 0; j < d; ++j) {
        const double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

} // namespace

bool is_similar(const dataset::Dataset& ds, uint32_t i, uint32_t j, double r_n) {
    require(i < ds.size() && j < ds.size(), Status::invalid_input, "index out of range");
    require(i != j, Status::invalid_input, "is_similar requires i != j");
    require(r_n >= 0.0, Status::invalid_input, "r_n must be >= 0");
    if (ds.y(i) != ds.y(j)) return false;
    if (ds.corrupted(i) || ds.corrupted(j)) return true;
    return dist2(ds.x(i).data(), ds.x(j).data(), ds.dim()) < r_n * r_n;
}

void SimilarityGraph::init_common(const dataset::Dataset& ds, double r_n) {
    require(r_n >= 0.0, Status::invalid_input, "r_n must be >= 0");
    n_ = ds.size();
    d_ = ds.dim();
    r_ = r_n;
    r2_ = r_n * r_n;
    xs_.resize(static_cast<size_t>(n_) * d_);
    ys_.resize(n_);
    corrupted_.resize(n_);
    cat_indices_.assign(ds.cat_size(), {});
    cat_corr_list_.assign(ds.cat_size(), {});
    cat_corrupted_.assign(ds.cat_size(), 0);
    for (uint32_t i = 0; i < n_; ++i) {
        auto x = ds.x(i);
        std::copy(x.begin(), x.end(), xs_.begin() + static_cast<size_t>(i) * d_);
        ys_[i] = ds.y(i);
        corrupted_[i] = ds.corrupted(i) ? 1 : 0;
        cat_indices_[ys_[i]].push_back(i);
        if (corrupted_[i]) {
            cat_corr_list_[ys_[i]].push_back(i);
            ++cat_corrupted_[ys_[i]];
        }
    }
}

uint64_t SimilarityGraph::cell_key(uint32_t cat, const double* x) const {
    uint64_t h = rng::mix64(0x51ed2701u + cat);
    for (uint32_t j = 0; j < d_; ++j) {
        const auto c = static_cast<int64_t>(std::floor(x[j] / r_));
        h = rng::mix64(h ^ (static_cast<uint64_t>(c) + 0x9e3779b97f4a7c15ULL));
    }
    return h;
}

// Visits every uncorrupted same-category point u != v with dist(u,v) < r_n.
// Buckets are deduplicated by address in case two scanned cells collide.
template <typename Fn>
void SimilarityGraph::scan_geometric(uint32_t v, Fn&& fn) const {
    if (!gridded_ || r_ <= 0.0) return;
    const double* xv = xs_.data() + static_cast<size_t>(v) * d_;
    const uint32_t cat = ys_[v];

    std::vector<int64_t> base(d_);
    for (uint32_t j = 0; j < d_; ++j) base[j] = static_cast<int64_t>(std::floor(xv[j] / r_));

    const std::vector<uint32_t>* seen[32];
    size_t seen_n = 0;
    std::vector<int64_t> off(d_, -1);
    std::vector<double> probe(d_);
    for (;;) {
        for (uint32_t j = 0; j < d_; ++j) {
            probe[j] = (static_cast<double>(base[j] + off[j]) + 0.5) * r_;
        }
        auto it = grid_.find(cell_key(cat, probe.data()));
        if (it != grid_.end()) {
            bool dup = false;
            for (size_t s = 0; s < seen_n; ++s) {
                if (seen[s] == &it->second) dup = true;
            }
            if (!dup) {
                if (seen_n < 32) seen[seen_n++] = &it->second;
                for (uint32_t u : it->second) {
                    if (u == v) continue;
                    const double* xu = xs_.data() + static_cast<size_t>(u) * d_;
                    if (dist2(xu, xv, d_) < r2_) fn(u);
                }
            }
        }
        uint32_t j = 0;
        while (j < d_ && off[j] == 1) off[j++] = -1;
        if (j == d_) break;
        ++off[j];
    }
}

SimilarityGraph SimilarityGraph::build(const dataset::Dataset& ds, double r_n) {
    SimilarityGraph g;
    g.init_common(ds, r_n);
    g.gridded_ = true;

    if (r_n > 0.0) {
        for (uint32_t i = 0; i < g.n_; ++i) {
            if (g.corrupted_[i]) continue;
            g.grid_[g.cell_key(g.ys_[i], g.xs_.data() + static_cast<size_t>(i) * g.d_)]
                .push_back(i);
        }
    }

    g.degrees_.assign(g.n_, 0);
    for (uint32_t v = 0; v < g.n_; ++v) {
        const uint32_t c = g.ys_[v];
        if (g.corrupted_[v]) {
            g.degrees_[v] = static_cast<uint32_t>(g.cat_indices_[c].size()) - 1;
        } else {
            uint32_t geo = 0;
            g.scan_geometric(v, [&](uint32_t) { ++geo; });
            g.degrees_[v] = g.cat_corrupted_[c] + geo;
        }
    }
    return g;
}

SimilarityGraph SimilarityGraph::build_bruteforce(const dataset::Dataset& ds, double r_n) {
    SimilarityGraph g;
    g.init_common(ds, r_n);
    g.explicit_ = true;
    g.adj_.assign(g.n_, {});
    for (uint32_t i = 0; i < g.n_; ++i) {
        for (uint32_t j = i + 1; j < g.n_; ++j) {
            if (is_similar(ds, i, j, r_n)) {
                g.adj_[i].push_back(j);
                g.adj_[j].push_back(i);
            }
        }
    }
    g.degrees_.assign(g.n_, 0);
    for (uint32_t v = 0; v < g.n_; ++v) {
        g.degrees_[v] = static_cast<uint32_t>(g.adj_[v].size());
    }
    return g;
}

uint32_t SimilarityGraph::max_degree() const {
    uint32_t m = 0;
    for (uint32_t d : degrees_) m = std::max(m, d);
    return m;
}

void SimilarityGraph::neighbors_into(uint32_t v, std::vector<uint32_t>& out) const {
    require(v < n_, Status::invalid_input, "vertex out of range");
    if (explicit_) {
        out.insert(out.end(), adj_[v].begin(), adj_[v].end());
        return;
    }
    const uint32_t c = ys_[v];
    if (corrupted_[v]) {
        for (uint32_t u : cat_indices_[c]) {
            if (u != v) out.push_back(u);
        }
        return;
    }
    out.insert(out.end(), cat_corr_list_[c].begin(), cat_corr_list_[c].end());
    scan_geometric(v, [&](uint32_t u) { out.push_back(u); });
}

std::vector<uint32_t> SimilarityGraph::neighbors(uint32_t v) const {
    std::vector<uint32_t> out;
    out.reserve(degrees_[v]);
    neighbors_into(v, out);
    std::sort(out.begin(), out.end());
    return out;
}

DegreeStats SimilarityGraph::degree_stats() const {
    DegreeStats s;
    s.histogram.assign(static_cast<size_t>(max_degree()) + 1, 0);
    double sum = 0.0;
    for (uint32_t v = 0; v < n_; ++v) {
        const uint32_t d = degrees_[v];
        ++s.histogram[d];
        sum += d;
        if (d > s.max_degree) {
            s.max_degree = d;
            s.argmax = v;
        }
    }
    s.mean_degree = n_ ? sum / n_ : 0.0;
    return s;
}

void SimilarityGraph::export_edges_csv(const std::string& path) const {
    require(n_ <= 4096, Status::invalid_input,
            "edge export is for debugging small graphs (n <= 4096)");
    std::ofstream out(path, std::ios::binary);
    require(out.good(), Status::invalid_input, "cannot open for writing: " + path);
    out << "u,v\n";
    for (uint32_t v = 0; v < n_; ++v) {
        for (uint32_t u : neighbors(v)) {
            if (v < u) out << v << ',' << u << "\n";
        }
    }
    require(out.good(), Status::invalid_input, "write failed: " + path);
}

} // namespace bd::similarity
