// Acceptance suite: one criterion per invocation (or all), one PASS/FAIL line
// per criterion. Exit code is the number of failing criteria.
//
//   ./acceptance        run everything
//   ./acceptance 7      run criterion 7 only

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "core/decomposition.hpp"
#include "core/harness.hpp"
#include "core/similarity.hpp"
#include "core/subsets.hpp"
#include "core/theory.hpp"
#include "testutil.hpp"

using namespace bd;
using decomposition::Order;
using similarity::SimilarityGraph;

namespace {

std::vector<harness::Record> run_records(const harness::ExperimentPlan& plan,
                                         unsigned jobs = 2) {
    std::ostringstream sink;
    harness::run(plan, sink, jobs);
    std::istringstream in(sink.str());
    return harness::load_records(in);
}

const harness::CheckResult* find_check(const std::vector<harness::CheckResult>& checks,
                                       const std::string& prefix) {
    for (const auto& c : checks) {
        if (c.name.rfind(prefix, 0) == 0) return &c;
    }
    return nullptr;
}

bool harness_check(const harness::ExperimentPlan& plan,
                   const std::vector<std::string>& names, std::string& detail) {
    const auto records = run_records(plan);
    size_t errors = 0;
    for (const auto& rec : records) {
        if (rec.error_status >= 0) ++errors;
    }
    const auto checks = harness::evaluate_checks(records);
    bool pass = errors == 0;
    std::ostringstream out;
    out << records.size() << " records";
    if (errors > 0) out << " (" << errors << " trial errors)";
    for (const auto& name : names) {
        const auto* c = find_check(checks, name);
        if (!c) {
            pass = false;
            out << "; missing check " << name;
            continue;
        }
        pass = pass && c->pass;
        out << "; " << c->name << ": " << c->detail;
    }
    detail = out.str();
    return pass;
}

// 1. Grid construction matches the quadratic oracle exactly.
bool criterion_oracle_equivalence(std::string& detail) {
    size_t vertices = 0;
    for (uint64_t t = 0; t < 100; ++t) {
        auto inst = testutil::random_instance(910000 + t, 2, 512);
        const auto fast = SimilarityGraph::build(inst.ds, inst.r);
        const auto slow = SimilarityGraph::build_bruteforce(inst.ds, inst.r);
        for (uint32_t v = 0; v < inst.ds.size(); ++v) {
            ++vertices;
            if (fast.neighbors(v) != slow.neighbors(v)) {
                detail = "adjacency mismatch at instance " + std::to_string(t) +
                         " vertex " + std::to_string(v);
                return false;
            }
        }
    }
    detail = "100 instances, " + std::to_string(vertices) + " vertices, adjacency equal";
    return true;
}

// 2. Constructive outputs always satisfy their validity checks.
bool criterion_soundness(std::string& detail) {
    size_t violations = 0, greedy_out = 0, lll_out = 0, subset_out = 0;
    size_t greedy_infeasible = 0, lll_exhausted = 0;
    for (uint64_t t = 0; t < 1000; ++t) {
        auto inst = testutil::random_instance(920000 + t, 10, 200);
        const auto g = SimilarityGraph::build(inst.ds, inst.r);
        const uint32_t k = 1 + static_cast<uint32_t>(t % 6);
        const auto order = static_cast<Order>(t % 3);
        try {
            const auto dec = decomposition::decompose_greedy(g, inst.ds, k, order, t);
            ++greedy_out;
            if (!decomposition::check_k_good(g, inst.ds, dec).valid) ++violations;
        } catch (const Error&) {
            ++greedy_infeasible;
        }
        try {
            const auto out = decomposition::decompose_lll(g, inst.ds, k, 6.0, t,
                                                          50ull * inst.ds.size());
            if (out.dec.has_value()) {
                ++lll_out;
                if (!decomposition::check_k_good(g, inst.ds, *out.dec).valid) ++violations;
            } else {
                ++lll_exhausted;
            }
        } catch (const Error&) {
            ++lll_exhausted;
        }
        const auto direct = subsets::nsim_greedy_direct(g, k, Order::natural);
        if (!subsets::check_similarity_budget(g, direct.indices, k).ok) ++violations;
        ++subset_out;
        if (k <= inst.ds.size()) {
            const auto kway = subsets::nsim_greedy_kway(g, k, t);
            if (!subsets::check_similarity_budget(g, kway.indices, k).ok) ++violations;
            ++subset_out;
        }
    }
    detail = std::to_string(violations) + " violations over " +
             std::to_string(greedy_out) + " greedy + " + std::to_string(lll_out) +
             " lll + " + std::to_string(subset_out) + " subset outputs (" +
             std::to_string(greedy_infeasible) + " infeasible, " +
             std::to_string(lll_exhausted) + " budget-exhausted)";
    return violations == 0;
}

// 3. Exact oracles bracket the heuristics and are monotone in k.
bool criterion_sandwich(std::string& detail) {
    size_t checked = 0, violations = 0, infeasible = 0;
    for (uint64_t t = 0; t < 500; ++t) {
        auto inst = testutil::random_instance(930000 + t, 4, 12, {0.0, 0.2, 0.5},
                                              {1, 2, 4});
        const auto g = SimilarityGraph::build(inst.ds, inst.r);
        for (uint32_t k : {1u, 2u, 3u}) {
            uint32_t tau = 0;
            bool tau_feasible = true;
            try {
                tau = decomposition::tau_exact(g, inst.ds, k).first;
            } catch (const Error&) {
                tau_feasible = false;
                ++infeasible;
            }
            if (tau_feasible) {
                ++checked;
                uint32_t greedy = 0;
                bool greedy_ok = true;
                try {
                    greedy = decomposition::decompose_greedy(g, inst.ds, k).size();
                } catch (const Error&) {
                    greedy_ok = false;
                }
                if (decomposition::tau_lower_bound(g, inst.ds, k) > tau) ++violations;
                if (greedy_ok && tau > greedy) ++violations;
                try {
                    if (decomposition::tau_exact(g, inst.ds, k + 1).first > tau) ++violations;
                } catch (const Error&) {
                    ++violations;  // feasible at k must stay feasible at k+1
                }
            } else {
                // Greedy must not produce what exact search rules out.
                try {
                    decomposition::decompose_greedy(g, inst.ds, k);
                    ++violations;
                } catch (const Error&) {
                }
            }

            const auto exact = subsets::nsim_exact(g, k).size;
            ++checked;
            if (subsets::nsim_greedy_direct(g, k).size > exact) ++violations;
            if (k <= inst.ds.size() && subsets::nsim_greedy_kway(g, k, t).size > exact) {
                ++violations;
            }
            if (exact > subsets::nsim_upper_grid(inst.ds, k, inst.r)) ++violations;
            if (subsets::nsim_exact(g, k + 1).size < exact) ++violations;
        }
    }
    detail = std::to_string(violations) + " violations over " + std::to_string(checked) +
             " sandwich checks (500 instances, " + std::to_string(infeasible) +
             " infeasible tau cases)";
    return violations == 0;
}

// 4. Closed forms on the 10-clique.
bool criterion_clique(std::string& detail) {
    const auto ds = testutil::clique(10);
    const auto g = SimilarityGraph::build(ds, 0.1);
    const auto [tau, witness] = decomposition::tau_exact(g, ds, 3);
    bool pass = tau == 4 && decomposition::check_k_good(g, ds, witness).valid;
    std::string nsims;
    for (uint32_t k = 1; k <= 10; ++k) {
        const auto size = subsets::nsim_exact(g, k).size;
        nsims += (k > 1 ? "," : "") + std::to_string(size);
        if (size != std::min<uint64_t>(10, k)) pass = false;
    }
    detail = "tau_exact(k=3) = " + std::to_string(tau) + ", nsim_exact(1..10) = " + nsims;
    return pass;
}

bool criterion_degree_scaling(std::string& detail) {
    auto plan = harness::ExperimentPlan::preset_defaults(harness::Preset::degree_scaling);
    plan.base_seed = 5001;
    return harness_check(plan, {"degree-band"}, detail);
}

bool criterion_tau_tradeoff(std::string& detail) {
    auto plan = harness::ExperimentPlan::preset_defaults(harness::Preset::tau_tradeoff);
    plan.base_seed = 6001;
    return harness_check(plan, {"tau-band"}, detail);
}

bool criterion_nsim_bracket(std::string& detail) {
    auto plan = harness::ExperimentPlan::preset_defaults(harness::Preset::nsim_bracket);
    plan.base_seed = 7001;
    return harness_check(plan, {"nsim-ratio", "nsim-k-linearity"}, detail);
}

bool criterion_variance(std::string& detail) {
    auto nsim_plan = harness::ExperimentPlan::preset_defaults(harness::Preset::variance_nsim);
    nsim_plan.base_seed = 8001;
    std::string a;
    bool pass = harness_check(nsim_plan, {"variance-nsim-law(cell 0)",
                                          "variance-nsim-law(cell 1)"}, a);
    auto tau_plan = harness::ExperimentPlan::preset_defaults(harness::Preset::variance_tau);
    tau_plan.base_seed = 8002;
    std::string b;
    pass = harness_check(tau_plan, {"variance-tau-relvar"}, b) && pass;
    detail = a + " | " + b;
    return pass;
}

bool criterion_lll_termination(std::string& detail) {
    auto plan = harness::ExperimentPlan::preset_defaults(harness::Preset::lll_termination);
    plan.base_seed = 9001;
    return harness_check(plan, {"lll-termination"}, detail);
}

// 10. Monte Carlo admit probability vs the categorical survival bound.
bool criterion_admit_probability(std::string& detail) {
    dataset::GeneratorConfig cfg;
    cfg.n = 500;
    cfg.d = 2;
    cfg.r_n = 0.02;
    cfg.p0 = 0.0;
    cfg.p0_means = dataset::P0Means::prob_corrupted;
    cfg.categorical.cat_size = 1;

    const uint32_t trials = 5000;
    uint64_t admits = 0;
    const double r2 = cfg.r_n * cfg.r_n;
    for (uint32_t t = 0; t < trials; ++t) {
        cfg.seed = harness::trial_seed(1010, 0, t);
        const auto ds = dataset::generate(cfg);
        const auto xn = ds.x(cfg.n - 1);
        bool admit = true;
        for (uint32_t j = 0; j + 1 < cfg.n && admit; ++j) {
            const auto xj = ds.x(j);
            double d2 = 0.0;
            for (uint32_t c = 0; c < cfg.d; ++c) {
                d2 += (xn[c] - xj[c]) * (xn[c] - xj[c]);
            }
            if (ds.y(j) == ds.y(cfg.n - 1) && d2 < r2) admit = false;
        }
        if (admit) ++admits;
    }
    const double p_hat = static_cast<double>(admits) / trials;

    // Survival bound: sum_y (1 - theta(y))^(n-1) p(y) with
    // theta(y) = eps_up * pi_d * r^d * p(y).
    const double theta = theory::unit_ball_volume(cfg.d) * r2;  // eps_up = p(y) = 1
    const double bound = std::pow(1.0 - theta, cfg.n - 1);
    const double se = std::sqrt(p_hat * (1.0 - p_hat) / trials);
    detail = "admit rate = " + std::to_string(p_hat) + ", bound = " +
             std::to_string(bound) + ", 3*SE = " + std::to_string(3.0 * se);
    return p_hat >= bound - 3.0 * se;
}

// 11. Byte-identical record streams under re-runs and different schedules.
bool criterion_determinism(std::string& detail) {
    bool pass = true;
    std::ostringstream note;
    for (auto preset : {harness::Preset::lll_termination, harness::Preset::variance_tau}) {
        auto plan = harness::ExperimentPlan::preset_defaults(preset);
        plan.base_seed = 1101;
        std::ostringstream a, b, c;
        harness::run(plan, a, 1);
        harness::run(plan, b, 1);
        harness::run(plan, c, 3);
        const bool rerun = a.str() == b.str();
        const bool sched = a.str() == c.str();
        pass = pass && rerun && sched && !a.str().empty();
        note << harness::preset_name(preset) << ": rerun "
             << (rerun ? "identical" : "DIFFERS") << ", jobs=3 "
             << (sched ? "identical" : "DIFFERS") << "; ";
    }
    detail = note.str();
    return pass;
}

struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> fn;
};

} // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "oracle graph equivalence", criterion_oracle_equivalence},
        {2, "constructive soundness", criterion_soundness},
        {3, "exact-oracle sandwiches", criterion_sandwich},
        {4, "clique closed forms", criterion_clique},
        {5, "degree scaling band", criterion_degree_scaling},
        {6, "tau-k tradeoff band", criterion_tau_tradeoff},
        {7, "nsim bracket", criterion_nsim_bracket},
        {8, "variance laws", criterion_variance},
        {9, "lll resampler termination", criterion_lll_termination},
        {10, "greedy admit probability", criterion_admit_probability},
        {11, "record-stream determinism", criterion_determinism},
    };

    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);

    int failures = 0;
    for (const auto& c : criteria) {
        if (only != 0 && c.id != only) continue;
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool pass = false;
        try {
            pass = c.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const auto secs = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - t0)
                              .count() /
                          1000.0;
        std::printf("%s: criterion %d (%s) [%.1fs] — %s\n", pass ? "PASS" : "FAIL", c.id,
                    c.name, secs, detail.c_str());
        if (!pass) ++failures;
    }
    return failures;
}
