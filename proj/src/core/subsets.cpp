#include "core/subsets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

namespace bd::subsets {

namespace {

// Budget-k admission pass over `candidates` (in the given order) restricted
// to candidates only. Sound by construction; admits everything whenever the
// candidate set itself already satisfies the budget.
std::vector<uint32_t> admit(const similarity::SimilarityGraph& g,
                            std::span<const uint32_t> candidates, uint32_t k) {
    std::vector<uint8_t> admitted(g.size(), 0);
    std::vector<uint32_t> within(g.size(), 0);
    std::vector<uint32_t> out;
    std::vector<uint32_t> scratch;
    for (uint32_t v : candidates) {
        scratch.clear();
        g.neighbors_into(v, scratch);
        uint32_t cnt = 0;
        bool ok = true;
        for (uint32_t u : scratch) {
            if (!admitted[u]) continue;
            if (within[u] + 2 > k) ok = false;
            if (++cnt >= k) ok = false;
            if (!ok) break;
        }
        if (!ok) continue;
        admitted[v] = 1;
        within[v] = cnt;
        for (uint32_t u : scratch) {
            if (admitted[u]) ++within[u];
        }
        out.push_back(v);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::greedy_direct: return "greedy-direct";
        case Method::greedy_kway: return "greedy-kway";
        case Method::exact: return "exact";
        case Method::grid_upper: return "grid-upper";
    }
    return "?";
}

BudgetCheck check_similarity_budget(const similarity::SimilarityGraph& g,
                                    std::span<const uint32_t> indices, uint32_t k) {
    require(k >= 1, Status::invalid_input, "k must be >= 1");
    std::vector<uint8_t> in(g.size(), 0);
    for (uint32_t v : indices) {
        require(v < g.size(), Status::invalid_input, "subset index out of range");
        require(!in[v], Status::invalid_input, "duplicate subset index");
        in[v] = 1;
    }
    BudgetCheck check;
    std::vector<uint32_t> scratch;
    for (uint32_t v : indices) {
        scratch.clear();
        g.neighbors_into(v, scratch);
        uint32_t deg = 0;
        for (uint32_t u : scratch) {
            if (in[u]) ++deg;
        }
        check.max_observed = std::max(check.max_observed, deg);
    }
    check.ok = check.max_observed + 1 <= k;
    return check;
}

SubsetResult nsim_greedy_direct(const similarity::SimilarityGraph& g, uint32_t k,
                                decomposition::Order order, uint64_t seed) {
    require(k >= 1, Status::invalid_input, "k must be >= 1");
    std::vector<uint32_t> idx(g.size());
    for (uint32_t i = 0; i < g.size(); ++i) idx[i] = i;
    switch (order) {
        case decomposition::Order::natural:
            break;
        case decomposition::Order::random: {
            rng::SplitMix64 r(seed);
            for (uint32_t i = g.size(); i > 1; --i) {
                std::swap(idx[i - 1], idx[r.next_below(i)]);
            }
            break;
        }
        case decomposition::Order::degree_desc:
            std::stable_sort(idx.begin(), idx.end(), [&](uint32_t a, uint32_t b) {
                return g.degree(a) > g.degree(b);
            });
            break;
    }
    SubsetResult res;
    res.k = k;
    res.method = Method::greedy_direct;
    res.indices = admit(g, idx, k);
    res.size = res.indices.size();
    return res;
}

SubsetResult nsim_greedy_kway(const similarity::SimilarityGraph& g, uint32_t k,
                              uint64_t seed) {
    require(k >= 1, Status::invalid_input, "k must be >= 1");
    require(k <= g.size(), Status::invalid_input, "k must be <= n");
    const uint32_t n = g.size();

    std::vector<uint32_t> shuffled(n);
    for (uint32_t i = 0; i < n; ++i) shuffled[i] = i;
    rng::SplitMix64 r(seed);
    for (uint32_t i = n; i > 1; --i) std::swap(shuffled[i - 1], shuffled[r.next_below(i)]);

    std::vector<uint32_t> group(n);
    for (uint32_t i = 0; i < n; ++i) group[shuffled[i]] = i % k;

    // Similarity-free pass per group: admit a vertex when no already-admitted
    // vertex of its own group is similar to it.
    std::vector<uint8_t> picked(n, 0);
    std::vector<uint32_t> scratch;
    for (uint32_t v = 0; v < n; ++v) {
        scratch.clear();
        g.neighbors_into(v, scratch);
        bool free_in_group = true;
        for (uint32_t u : scratch) {
            if (picked[u] && group[u] == group[v]) {
                free_in_group = false;
                break;
            }
        }
        if (free_in_group) picked[v] = 1;
    }

    std::vector<uint32_t> unioned;
    for (uint32_t v = 0; v < n; ++v) {
        if (picked[v]) unioned.push_back(v);
    }

    SubsetResult res;
    res.k = k;
    res.method = Method::greedy_kway;
    res.indices = admit(g, unioned, k);
    res.size = res.indices.size();
    return res;
}

uint64_t nsim_upper_grid(const dataset::Dataset& ds, uint32_t k, double r_n) {
    require(k >= 1, Status::invalid_input, "k must be >= 1");
    require(r_n >= 0.0, Status::invalid_input, "r_n must be >= 0");
    const uint32_t n = ds.size();

    std::vector<uint64_t> corrupted_per_cat(ds.cat_size(), 0);
    uint64_t uncorrupted = 0;
    for (uint32_t v = 0; v < n; ++v) {
        if (ds.corrupted(v)) {
            ++corrupted_per_cat[ds.y(v)];
        } else {
            ++uncorrupted;
        }
    }

    uint64_t bound = 0;
    for (uint64_t m : corrupted_per_cat) bound += std::min<uint64_t>(m, k);

    if (r_n <= 0.0) {
        // No geometric constraint: every uncorrupted point is admissible.
        return bound + uncorrupted;
    }

    const double side = r_n / (2.0 * std::sqrt(static_cast<double>(ds.dim())));
    std::unordered_map<uint64_t, uint64_t> cell_counts;
    for (uint32_t v = 0; v < n; ++v) {
        if (ds.corrupted(v)) continue;
        uint64_t h = rng::mix64(0x5f3759dfu + ds.y(v));
        auto x = ds.x(v);
        for (uint32_t j = 0; j < ds.dim(); ++j) {
            const auto cell = static_cast<int64_t>(std::floor(x[j] / side));
            h = rng::mix64(h ^ (static_cast<uint64_t>(cell) + 0x9e3779b97f4a7c15ULL));
        }
        ++cell_counts[h];
    }
    for (const auto& [key, cnt] : cell_counts) {
        (void)key;
        bound += std::min<uint64_t>(cnt, k);
    }
    return bound;
}

SubsetResult nsim_exact(const similarity::SimilarityGraph& g, uint32_t k,
                        uint32_t n_cap) {
    require(k >= 1, Status::invalid_input, "k must be >= 1");
    const uint32_t n = g.size();
    require(n <= n_cap, Status::invalid_input,
            "nsim_exact is capped at n <= " + std::to_string(n_cap));

    std::vector<uint32_t> order(n);
    for (uint32_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        return g.degree(a) > g.degree(b);
    });

    std::vector<std::vector<uint32_t>> adj(n);
    for (uint32_t v = 0; v < n; ++v) adj[v] = g.neighbors(v);

    std::vector<uint8_t> in(n, 0);
    std::vector<uint32_t> within(n, 0);
    std::vector<uint32_t> current, best;

    auto dfs = [&](auto&& self, uint32_t pos) -> void {
        if (current.size() + (n - pos) <= best.size()) return;  // cannot improve
        if (pos == n) {
            best = current;
            return;
        }
        const uint32_t v = order[pos];
        uint32_t cnt = 0;
        bool ok = true;
        for (uint32_t u : adj[v]) {
            if (!in[u]) continue;
            if (within[u] + 2 > k) ok = false;
            if (++cnt >= k) ok = false;
            if (!ok) break;
        }
        if (ok) {
            in[v] = 1;
            within[v] = cnt;
            for (uint32_t u : adj[v]) {
                if (in[u]) ++within[u];
            }
            current.push_back(v);
            self(self, pos + 1);
            current.pop_back();
            for (uint32_t u : adj[v]) {
                if (in[u]) --within[u];
            }
            in[v] = 0;
        }
        self(self, pos + 1);
    };
    dfs(dfs, 0);

    SubsetResult res;
    res.k = k;
    res.method = Method::exact;
    res.indices = best;
    std::sort(res.indices.begin(), res.indices.end());
    res.size = res.indices.size();
    return res;
}

void save_subset_csv(const SubsetResult& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), Status::invalid_input, "cannot open for writing: " + path);
    out << "# method=" << method_name(s.method) << " k=" << s.k << " size=" << s.size
        << "\n";
    out << "idx\n";
    for (uint32_t v : s.indices) out << v << "\n";
    require(out.good(), Status::invalid_input, "write failed: " + path);
}

SubsetResult load_subset_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), Status::invalid_input, "cannot open subset file: " + path);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), Status::invalid_input,
            path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    SubsetResult res;
    require(line.rfind("# method=", 0) == 0, Status::invalid_input,
            path + ": missing method header comment");
    {
        std::string rest = line.substr(9);
        const auto ksep = rest.find(" k=");
        const auto ssep = rest.find(" size=");
        require(ksep != std::string::npos && ssep != std::string::npos,
                Status::invalid_input, path + ": malformed header comment");
        const std::string m = rest.substr(0, ksep);
        if (m == "greedy-direct") res.method = Method::greedy_direct;
        else if (m == "greedy-kway") res.method = Method::greedy_kway;
        else if (m == "exact") res.method = Method::exact;
        else if (m == "grid-upper") res.method = Method::grid_upper;
        else fail(Status::invalid_input, path + ": unknown method " + m);
        res.k = static_cast<uint32_t>(
            config::parse_uint(rest.substr(ksep + 3, ssep - ksep - 3), path + ": k"));
    }
    require(static_cast<bool>(std::getline(in, line)), Status::invalid_input,
            path + ": missing idx header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    require(line == "idx", Status::invalid_input, path + ": malformed idx header");

    size_t rowno = 0;
    while (std::getline(in, line)) {
        ++rowno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        res.indices.push_back(static_cast<uint32_t>(config::parse_uint(
            line, path + ": row " + std::to_string(rowno))));
    }
    res.size = res.indices.size();
    return res;
}

} // namespace bd::subsets
