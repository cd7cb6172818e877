#include "core/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace bd::decomposition {

namespace {

// Flattens batches to a vertex -> batch map, enforcing the structural
// contract: non-empty batches, indices 0..n-1 exactly once.
std::vector<uint32_t> flatten(const BatchDecomposition& dec, uint32_t n) {
    std::vector<uint32_t> owner(n, UINT32_MAX);
    for (uint32_t b = 0; b < dec.size(); ++b) {
        require(!dec.batches[b].empty(), Status::invalid_input,
                "batch " + std::to_string(b) + " is empty");
        for (uint32_t v : dec.batches[b]) {
            require(v < n, Status::invalid_input,
                    "batch member " + std::to_string(v) + " out of range");
            require(owner[v] == UINT32_MAX, Status::invalid_input,
                    "index " + std::to_string(v) + " appears in two batches");
            owner[v] = b;
        }
    }
    for (uint32_t v = 0; v < n; ++v) {
        require(owner[v] != UINT32_MAX, Status::invalid_input,
                "index " + std::to_string(v) + " not covered by any batch");
    }
    return owner;
}

std::vector<uint32_t> make_order(const similarity::SimilarityGraph& g, Order order,
                                 uint64_t seed) {
    std::vector<uint32_t> idx(g.size());
    for (uint32_t i = 0; i < g.size(); ++i) idx[i] = i;
    switch (order) {
        case Order::natural:
            break;
        case Order::random: {
            rng::SplitMix64 r(seed);
            for (uint32_t i = g.size(); i > 1; --i) {
                std::swap(idx[i - 1], idx[r.next_below(i)]);
            }
            break;
        }
        case Order::degree_desc:
            std::stable_sort(idx.begin(), idx.end(), [&](uint32_t a, uint32_t b) {
                return g.degree(a) > g.degree(b);
            });
            break;
    }
    return idx;
}

} // namespace

std::vector<uint32_t> BatchDecomposition::batch_of(uint32_t n) const {
    return flatten(*this, n);
}

std::string ValidityReport::to_text() const {
    std::ostringstream out;
    for (const auto& v : violations) {
        switch (v.kind) {
            case ViolationKind::no_uncorrupted:
                out << "no-uncorrupted batch=" << v.batch << "\n";
                break;
            case ViolationKind::similarity_budget:
                out << "similarity-budget batch=" << v.batch << " vertex=" << *v.vertex
                    << " observed=" << v.observed << "\n";
                break;
        }
    }
    return out.str();
}

ValidityReport check_k_good(const similarity::SimilarityGraph& g,
                            const dataset::Dataset& ds, const BatchDecomposition& dec) {
    require(g.size() == ds.size(), Status::invalid_input, "graph/dataset size mismatch");
    require(dec.k >= 1, Status::invalid_input, "k must be >= 1");
    const uint32_t n = g.size();
    const auto owner = flatten(dec, n);

    ValidityReport report;
    for (uint32_t b = 0; b < dec.size(); ++b) {
        bool has_uncorrupted = false;
        for (uint32_t v : dec.batches[b]) {
            if (!ds.corrupted(v)) has_uncorrupted = true;
        }
        if (!has_uncorrupted) {
            report.violations.push_back({ViolationKind::no_uncorrupted, b, std::nullopt, 0});
        }
    }

    std::vector<uint32_t> scratch;
    for (uint32_t v = 0; v < n; ++v) {
        scratch.clear();
        g.neighbors_into(v, scratch);
        uint64_t within = 0;
        for (uint32_t u : scratch) {
            if (owner[u] == owner[v]) ++within;
        }
        if (within > dec.k - 1) {
            report.violations.push_back(
                {ViolationKind::similarity_budget, owner[v], v, within});
        }
    }
    report.valid = report.violations.empty();
    return report;
}

Order order_from_string(const std::string& name) {
    if (name == "natural") return Order::natural;
    if (name == "random") return Order::random;
    if (name == "degree-desc") return Order::degree_desc;
    fail(Status::invalid_input, "order must be natural, random or degree-desc");
}

BatchDecomposition decompose_greedy(const similarity::SimilarityGraph& g,
                                    const dataset::Dataset& ds, uint32_t k,
                                    Order order, uint64_t seed) {
    require(g.size() == ds.size(), Status::invalid_input, "graph/dataset size mismatch");
    require(k >= 1, Status::invalid_input, "k must be >= 1");
    const uint32_t n = g.size();

    bool any_uncorrupted = false;
    for (uint32_t v = 0; v < n; ++v) {
        if (!ds.corrupted(v)) any_uncorrupted = true;
    }
    require(any_uncorrupted, Status::infeasible,
            "no uncorrupted point exists; no batch can satisfy the decomposition");

    // Uncorrupted points first so every batch is opened by one.
    auto idx = make_order(g, order, seed);
    std::stable_partition(idx.begin(), idx.end(),
                          [&](uint32_t v) { return !ds.corrupted(v); });

    std::vector<uint32_t> owner(n, UINT32_MAX);
    std::vector<uint32_t> within(n, 0);
    std::vector<std::vector<uint32_t>> batches;
    std::vector<uint32_t> cnt, maxw;
    std::vector<uint32_t> touched;
    std::vector<uint32_t> scratch;

    for (uint32_t v : idx) {
        scratch.clear();
        g.neighbors_into(v, scratch);
        cnt.assign(batches.size(), 0);
        maxw.assign(batches.size(), 0);
        touched.clear();
        for (uint32_t u : scratch) {
            const uint32_t b = owner[u];
            if (b == UINT32_MAX) continue;
            if (cnt[b] == 0) touched.push_back(b);
            ++cnt[b];
            maxw[b] = std::max(maxw[b], within[u]);
        }
        uint32_t chosen = UINT32_MAX;
        for (uint32_t b = 0; b < batches.size(); ++b) {
            // v itself stays within budget and no member is pushed over it.
            if (cnt[b] < k && (cnt[b] == 0 || maxw[b] + 2 <= k)) {
                chosen = b;
                break;
            }
        }
        if (chosen == UINT32_MAX) {
            if (ds.corrupted(v)) {
                // All uncorrupted points are already placed, so a fresh batch
                // could never gain the uncorrupted member it needs.
                fail(Status::infeasible,
                     "corrupted point " + std::to_string(v) + " (category " +
                         std::to_string(g.category(v)) +
                         ") cannot join any batch within budget k=" + std::to_string(k));
            }
            chosen = static_cast<uint32_t>(batches.size());
            batches.emplace_back();
        }
        owner[v] = chosen;
        within[v] = chosen < cnt.size() ? cnt[chosen] : 0;
        batches[chosen].push_back(v);
        for (uint32_t u : scratch) {
            if (owner[u] == chosen) ++within[u];
        }
    }

    BatchDecomposition dec;
    dec.k = k;
    dec.batches = std::move(batches);
    for (auto& b : dec.batches) std::sort(b.begin(), b.end());
    return dec;
}

LllOutcome decompose_lll(const similarity::SimilarityGraph& g,
                         const dataset::Dataset& ds, uint32_t k, double theta,
                         uint64_t seed, uint64_t max_rounds) {
    require(g.size() == ds.size(), Status::invalid_input, "graph/dataset size mismatch");
    require(k >= 1, Status::invalid_input, "k must be >= 1");
    require(theta > 0.0, Status::invalid_input, "theta must be > 0");
    const uint32_t n = g.size();

    std::vector<uint32_t> uncorrupted;
    for (uint32_t v = 0; v < n; ++v) {
        if (!ds.corrupted(v)) uncorrupted.push_back(v);
    }
    require(!uncorrupted.empty(), Status::infeasible,
            "no uncorrupted point exists; no batch can satisfy the decomposition");

    const uint32_t d_hat = std::max<uint32_t>(1, g.max_degree());
    const uint64_t q64 = std::max<uint64_t>(
        1, static_cast<uint64_t>(std::ceil(theta * static_cast<double>(d_hat) / k)));
    require(q64 <= 64ull * n + 1024, Status::invalid_input,
            "theta yields q=" + std::to_string(q64) + " batches, far beyond n");
    const uint32_t q = static_cast<uint32_t>(q64);

    rng::SplitMix64 r(seed);
    std::vector<uint32_t> z(n);
    for (uint32_t v = 0; v < n; ++v) z[v] = static_cast<uint32_t>(r.next_below(q));

    std::vector<uint32_t> within(n, 0);
    std::vector<uint32_t> batch_total(q, 0), batch_unc(q, 0);
    std::vector<uint32_t> scratch;
    for (uint32_t v = 0; v < n; ++v) {
        ++batch_total[z[v]];
        if (!ds.corrupted(v)) ++batch_unc[z[v]];
        scratch.clear();
        g.neighbors_into(v, scratch);
        for (uint32_t u : scratch) {
            if (z[u] == z[v]) ++within[v];
        }
    }

    std::set<uint32_t> violated;
    for (uint32_t v = 0; v < n; ++v) {
        if (within[v] >= k) violated.insert(v);
    }
    std::set<uint32_t> bad_batches;
    for (uint32_t b = 0; b < q; ++b) {
        if (batch_total[b] > 0 && batch_unc[b] == 0) bad_batches.insert(b);
    }

    auto refresh_batch = [&](uint32_t b) {
        if (batch_total[b] > 0 && batch_unc[b] == 0) {
            bad_batches.insert(b);
        } else {
            bad_batches.erase(b);
        }
    };
    auto refresh_vertex = [&](uint32_t v) {
        if (within[v] >= k) {
            violated.insert(v);
        } else {
            violated.erase(v);
        }
    };

    auto move_vertex = [&](uint32_t v, uint32_t to) {
        const uint32_t from = z[v];
        if (from == to) return;
        scratch.clear();
        g.neighbors_into(v, scratch);
        uint32_t in_new = 0;
        for (uint32_t u : scratch) {
            if (z[u] == from) {
                --within[u];
                refresh_vertex(u);
            } else if (z[u] == to) {
                ++within[u];
                refresh_vertex(u);
                ++in_new;
            }
        }
        --batch_total[from];
        if (!ds.corrupted(v)) --batch_unc[from];
        z[v] = to;
        ++batch_total[to];
        if (!ds.corrupted(v)) ++batch_unc[to];
        within[v] = in_new;
        refresh_vertex(v);
        refresh_batch(from);
        refresh_batch(to);
    };

    LllOutcome out;
    out.q = q;
    std::vector<uint32_t> offenders;
    while (!violated.empty() || !bad_batches.empty()) {
        if (out.rounds >= max_rounds) return out;
        ++out.rounds;
        if (!violated.empty()) {
            const uint32_t v = *violated.begin();
            offenders.clear();
            scratch.clear();
            g.neighbors_into(v, scratch);
            for (uint32_t u : scratch) {
                if (z[u] == z[v]) offenders.push_back(u);
            }
            std::sort(offenders.begin(), offenders.end());
            offenders.resize(std::min<size_t>(offenders.size(), k));
            // Resample the k+1 variables of the first violating subset.
            move_vertex(v, static_cast<uint32_t>(r.next_below(q)));
            for (uint32_t u : offenders) {
                move_vertex(u, static_cast<uint32_t>(r.next_below(q)));
            }
        } else {
            const uint32_t b = *bad_batches.begin();
            const uint32_t u =
                uncorrupted[r.next_below(uncorrupted.size())];
            ++out.repairs;
            move_vertex(u, b);
        }
    }

    BatchDecomposition dec;
    dec.k = k;
    // Drop empty batches, renumbering by batch id.
    std::vector<int64_t> remap(q, -1);
    int64_t next = 0;
    for (uint32_t b = 0; b < q; ++b) {
        if (batch_total[b] > 0) remap[b] = next++;
    }
    dec.batches.assign(static_cast<size_t>(next), {});
    for (uint32_t v = 0; v < n; ++v) {
        dec.batches[static_cast<size_t>(remap[z[v]])].push_back(v);
    }
    out.dec = std::move(dec);
    return out;
}

std::pair<uint32_t, BatchDecomposition> tau_exact(const similarity::SimilarityGraph& g,
                                                  const dataset::Dataset& ds, uint32_t k,
                                                  uint32_t n_cap) {
    require(g.size() == ds.size(), Status::invalid_input, "graph/dataset size mismatch");
    require(k >= 1, Status::invalid_input, "k must be >= 1");
    const uint32_t n = g.size();
    require(n <= n_cap, Status::invalid_input,
            "tau_exact is capped at n <= " + std::to_string(n_cap));

    uint32_t total_unc = 0;
    for (uint32_t v = 0; v < n; ++v) {
        if (!ds.corrupted(v)) ++total_unc;
    }
    require(total_unc >= 1, Status::infeasible,
            "no uncorrupted point exists; no batch can satisfy the decomposition");

    std::vector<std::vector<uint32_t>> adj(n);
    for (uint32_t v = 0; v < n; ++v) adj[v] = g.neighbors(v);

    uint32_t best = total_unc + 1;
    std::vector<uint32_t> best_owner;
    try {
        auto greedy = decompose_greedy(g, ds, k);
        best = greedy.size();
        best_owner = greedy.batch_of(n);
    } catch (const Error&) {
        // Greedy is incomplete; the search below decides feasibility.
    }

    std::vector<uint32_t> owner(n, UINT32_MAX);
    std::vector<uint32_t> within(n, 0);
    std::vector<uint32_t> batch_unc;
    uint32_t lacking = 0;
    uint32_t remaining_unc = total_unc;

    auto admissible = [&](uint32_t v, uint32_t b) {
        uint32_t c = 0;
        for (uint32_t u : adj[v]) {
            if (owner[u] == b) {
                if (within[u] + 2 > k) return std::pair<bool, uint32_t>{false, 0};
                ++c;
                if (c >= k) return std::pair<bool, uint32_t>{false, 0};
            }
        }
        return std::pair<bool, uint32_t>{true, c};
    };

    auto dfs = [&](auto&& self, uint32_t v) -> void {
        if (static_cast<uint32_t>(batch_unc.size()) >= best) return;
        if (lacking > remaining_unc) return;
        if (v == n) {
            if (lacking == 0 && static_cast<uint32_t>(batch_unc.size()) < best) {
                best = static_cast<uint32_t>(batch_unc.size());
                best_owner = owner;
            }
            return;
        }
        const bool unc = !ds.corrupted(v);
        for (uint32_t b = 0; b < batch_unc.size(); ++b) {
            auto [ok, c] = admissible(v, b);
            if (!ok) continue;
            owner[v] = b;
            within[v] = c;
            for (uint32_t u : adj[v]) {
                if (owner[u] == b) ++within[u];
            }
            if (unc) {
                if (batch_unc[b] == 0) --lacking;
                ++batch_unc[b];
                --remaining_unc;
            }
            self(self, v + 1);
            if (unc) {
                ++remaining_unc;
                --batch_unc[b];
                if (batch_unc[b] == 0) ++lacking;
            }
            for (uint32_t u : adj[v]) {
                if (owner[u] == b) --within[u];
            }
            owner[v] = UINT32_MAX;
        }
        if (static_cast<uint32_t>(batch_unc.size()) + 1 < best) {
            const uint32_t b = static_cast<uint32_t>(batch_unc.size());
            owner[v] = b;
            within[v] = 0;
            batch_unc.push_back(unc ? 1 : 0);
            if (!unc) ++lacking;
            if (unc) --remaining_unc;
            self(self, v + 1);
            if (unc) ++remaining_unc;
            if (!unc) --lacking;
            batch_unc.pop_back();
            owner[v] = UINT32_MAX;
        }
    };
    dfs(dfs, 0);

    require(best <= total_unc, Status::infeasible,
            "no k-good decomposition exists for k=" + std::to_string(k));

    BatchDecomposition dec;
    dec.k = k;
    dec.batches.assign(best, {});
    for (uint32_t v = 0; v < n; ++v) dec.batches[best_owner[v]].push_back(v);
    return {best, std::move(dec)};
}

uint32_t tau_lower_bound(const similarity::SimilarityGraph& g,
                         const dataset::Dataset& ds, uint32_t k) {
    require(g.size() == ds.size(), Status::invalid_input, "graph/dataset size mismatch");
    require(k >= 1, Status::invalid_input, "k must be >= 1");
    const uint32_t n = ds.size();
    uint64_t best = 1;

    // Corrupted points of one category are pairwise similar.
    for (uint32_t c = 0; c < g.cat_size(); ++c) {
        const uint64_t m = g.category_corrupted(c);
        if (m > 0) best = std::max(best, (m + k - 1) / k);
    }

    // Uncorrupted points sharing a cell of side r_n / sqrt(4d) are pairwise
    // within r_n (cell diameter r_n / 2).
    const double r = g.radius();
    if (r > 0.0) {
        const double side = r / (2.0 * std::sqrt(static_cast<double>(ds.dim())));
        std::unordered_map<uint64_t, uint64_t> counts;
        for (uint32_t v = 0; v < n; ++v) {
            if (ds.corrupted(v)) continue;
            uint64_t h = rng::mix64(0x7031u + ds.y(v));
            auto x = ds.x(v);
            for (uint32_t j = 0; j < ds.dim(); ++j) {
                const auto cell = static_cast<int64_t>(std::floor(x[j] / side));
                h = rng::mix64(h ^ (static_cast<uint64_t>(cell) + 0x9e3779b97f4a7c15ULL));
            }
            ++counts[h];
        }
        for (const auto& [key, cnt] : counts) {
            (void)key;
            best = std::max(best, (cnt + k - 1) / k);
        }
    }
    return static_cast<uint32_t>(best);
}

void save_decomposition_csv(const BatchDecomposition& dec, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), Status::invalid_input, "cannot open for writing: " + path);
    uint32_t n = 0;
    for (const auto& b : dec.batches) n += static_cast<uint32_t>(b.size());
    const auto owner = flatten(dec, n);
    out << "idx,batch\n";
    for (uint32_t v = 0; v < n; ++v) out << v << ',' << owner[v] << "\n";
    require(out.good(), Status::invalid_input, "write failed: " + path);
}

BatchDecomposition load_decomposition_csv(const std::string& path, uint32_t k) {
    require(k >= 1, Status::invalid_input, "k must be >= 1");
    std::ifstream in(path, std::ios::binary);
    require(in.good(), Status::invalid_input, "cannot open decomposition file: " + path);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), Status::invalid_input,
            path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    require(line == "idx,batch", Status::invalid_input, path + ": malformed header");

    std::vector<std::pair<uint64_t, uint64_t>> rows;
    size_t rowno = 0;
    while (std::getline(in, line)) {
        ++rowno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        const std::string where = path + ": row " + std::to_string(rowno);
        require(comma != std::string::npos, Status::invalid_input,
                where + ": expected idx,batch");
        rows.emplace_back(config::parse_uint(line.substr(0, comma), where + ": idx"),
                          config::parse_uint(line.substr(comma + 1), where + ": batch"));
    }
    require(!rows.empty(), Status::invalid_input, path + ": no data rows");
    const uint32_t n = static_cast<uint32_t>(rows.size());

    std::vector<int64_t> raw(n, -1);
    for (const auto& [idx, batch] : rows) {
        require(idx < n, Status::invalid_input, path + ": idx out of range");
        require(raw[idx] < 0, Status::invalid_input, path + ": duplicate idx");
        raw[idx] = static_cast<int64_t>(batch);
    }

    // Batch ids need not be dense in the file; renumber by ascending raw id.
    std::vector<uint64_t> ids;
    for (int64_t b : raw) ids.push_back(static_cast<uint64_t>(b));
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    BatchDecomposition dec;
    dec.k = k;
    dec.batches.assign(ids.size(), {});
    for (uint32_t v = 0; v < n; ++v) {
        const auto pos = std::lower_bound(ids.begin(), ids.end(),
                                          static_cast<uint64_t>(raw[v])) -
                         ids.begin();
        dec.batches[static_cast<size_t>(pos)].push_back(v);
    }
    return dec;
}

} // namespace bd::decomposition
