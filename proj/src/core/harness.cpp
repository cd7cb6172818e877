#include "core/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "core/decomposition.hpp"
#include "core/similarity.hpp"
#include "core/subsets.hpp"

namespace bd::harness {

using json = nlohmann::ordered_json;

namespace stats {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace {
double quantile_sorted(const std::vector<double>& v, double p) {
    if (v.empty()) return 0.0;
    const double pos = p * static_cast<double>(v.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}
} // namespace

std::pair<double, double> iqr(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return {quantile_sorted(v, 0.25), quantile_sorted(v, 0.75)};
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

double jackknife_se_var_minus_mean(const std::vector<double>& v, double factor) {
    const size_t m = v.size();
    if (m < 3) return 0.0;
    double s1 = 0.0, s2 = 0.0;
    for (double x : v) {
        s1 += x;
        s2 += x * x;
    }
    std::vector<double> d(m);
    const double mm = static_cast<double>(m - 1);
    for (size_t i = 0; i < m; ++i) {
        const double mu = (s1 - v[i]) / mm;
        const double var = (s2 - v[i] * v[i] - mm * mu * mu) / (mm - 1.0);
        d[i] = var - factor * mu;
    }
    const double dbar = mean(d);
    double s = 0.0;
    for (double x : d) s += (x - dbar) * (x - dbar);
    return std::sqrt(s * mm / static_cast<double>(m));
}

} // namespace stats

Preset preset_from_string(const std::string& name) {
    if (name == "degree-scaling") return Preset::degree_scaling;
    if (name == "tau-tradeoff") return Preset::tau_tradeoff;
    if (name == "nsim-bracket") return Preset::nsim_bracket;
    if (name == "variance-nsim") return Preset::variance_nsim;
    if (name == "variance-tau") return Preset::variance_tau;
    if (name == "lll-termination") return Preset::lll_termination;
    fail(Status::invalid_input, "unknown preset: " + name);
}

std::string preset_name(Preset p) {
    switch (p) {
        case Preset::degree_scaling: return "degree-scaling";
        case Preset::tau_tradeoff: return "tau-tradeoff";
        case Preset::nsim_bracket: return "nsim-bracket";
        case Preset::variance_nsim: return "variance-nsim";
        case Preset::variance_tau: return "variance-tau";
        case Preset::lll_termination: return "lll-termination";
    }
    return "?";
}

ExperimentPlan ExperimentPlan::preset_defaults(Preset p) {
    ExperimentPlan plan;
    plan.preset = p;
    plan.base.d = 2;
    plan.base.p0 = 0.0;
    plan.base.p0_means = dataset::P0Means::prob_corrupted;
    plan.base.categorical.cat_size = 4;
    switch (p) {
        case Preset::degree_scaling:
            plan.n_list = {1u << 11, 1u << 13, 1u << 15};
            plan.trials = 20;
            plan.beta = 0.25;
            break;
        case Preset::tau_tradeoff:
            plan.n_list = {1u << 14};
            plan.k_list = {2, 4, 8, 16};
            plan.trials = 10;
            plan.beta = 0.25;
            break;
        case Preset::nsim_bracket:
            // One-dimensional continuous part: the cell-counting certificate
            // is within a small constant of achievable packings there, so the
            // bracket is informative. Cells stay saturated across the sweep,
            // which keeps both sides linear in k.
            plan.n_list = {1u << 10, 1u << 12, 1u << 14};
            plan.k_list = {1, 2, 4};
            plan.trials = 10;
            plan.base.d = 1;
            plan.beta = 0.25;
            plan.rho = 0.3;
            plan.pup_theta = 0.2;
            break;
        case Preset::variance_nsim:
            plan.n_list = {10};
            plan.k_list = {1, 2};
            plan.r_list = {0.3};
            plan.trials = 2000;
            plan.base.categorical.cat_size = 2;
            break;
        case Preset::variance_tau:
            plan.n_list = {12};
            plan.k_list = {1};
            plan.r_list = {0.25, 0.9};
            plan.trials = 400;
            plan.base.categorical.cat_size = 1;
            break;
        case Preset::lll_termination:
            plan.n_list = {192};
            plan.k_list = {3};
            plan.r_list = {0.15};
            plan.trials = 200;
            plan.base.p0 = 0.1;
            break;
    }
    return plan;
}

namespace {

dataset::GeneratorConfig resolve_config(const ExperimentPlan& plan, uint32_t n,
                                        double r_n) {
    dataset::GeneratorConfig cfg = plan.base;
    cfg.n = n;
    cfg.r_n = r_n;
    if (plan.rho > 0.0) {
        cfg.categorical.cat_size = static_cast<uint32_t>(std::max<long long>(
            1, std::llround(std::pow(static_cast<double>(n), plan.rho))));
    }
    if (plan.pup_theta > 0.0) {
        if (cfg.categorical.cat_size >= 2) {
            cfg.categorical.kind = dataset::CategoricalKind::two_level;
            const double top = std::pow(static_cast<double>(n), -plan.pup_theta);
            cfg.categorical.top_mass =
                std::min(std::max(top, 1.0 / cfg.categorical.cat_size), 1.0 - 1e-9);
        } else {
            cfg.categorical.kind = dataset::CategoricalKind::uniform;
        }
    }
    return cfg;
}

double cell_radius(const ExperimentPlan& plan, uint32_t n, size_t r_idx) {
    if (!plan.r_list.empty()) return plan.r_list[r_idx];
    if (plan.beta > 0.0) return std::pow(static_cast<double>(n), -plan.beta);
    return plan.base.r_n;
}

} // namespace

void ExperimentPlan::validate() const {
    for (uint32_t k : k_list) {
        require(k >= 1, Status::invalid_input, "k_list entries must be >= 1");
    }
    if (n_list.empty()) return;  // empty sweep
    const uint32_t n_max = *std::max_element(n_list.begin(), n_list.end());
    for (uint32_t n : n_list) {
        require(n >= 1, Status::invalid_input, "n_list entries must be >= 1");
        for (uint32_t k : k_list) {
            require(k <= n, Status::invalid_input,
                    "regime guard violated: k = " + std::to_string(k) + " exceeds n = " +
                        std::to_string(n));
        }
    }

    const bool scaling_claim = preset == Preset::degree_scaling ||
                               preset == Preset::tau_tradeoff ||
                               preset == Preset::nsim_bracket;
    if (!scaling_claim) return;

    // Concentration-style presets claim the growth conditions; check them at
    // the largest swept n, where they bind.
    const size_t r_cells = r_list.empty() ? 1 : r_list.size();
    for (size_t ri = 0; ri < r_cells; ++ri) {
        const auto cfg = resolve_config(*this, n_max, cell_radius(*this, n_max, ri));
        const auto tp = dataset::theory_params(cfg);
        const auto [delta, lambda] = theory::delta_lambda(tp);
        (void)delta;
        const double need = 2.0 * std::log(static_cast<double>(n_max));
        require(lambda >= need, Status::invalid_input,
                "regime guard violated: Lambda = " + std::to_string(lambda) +
                    " < 2 log n = " + std::to_string(need) +
                    " at n = " + std::to_string(n_max));
        if (beta > 0.0) {
            const double ln_n = std::log(static_cast<double>(n_max));
            const double theta_eff = -std::log(tp.p_up) / ln_n;
            require(beta < (1.0 - theta_eff) / cfg.d, Status::invalid_input,
                    "regime guard violated: beta >= (1 - theta)/d with theta = " +
                        std::to_string(theta_eff));
            if (preset == Preset::nsim_bracket) {
                const double lambda_eff = -std::log(tp.p_low) / ln_n;
                require(beta < (1.0 - lambda_eff) / cfg.d, Status::invalid_input,
                        "regime guard violated: beta >= (1 - lambda)/d with lambda = " +
                            std::to_string(lambda_eff));
            }
        }
    }
}

ExperimentPlan plan_from_ini(const config::Ini& ini, const std::string& preset_override) {
    ini.check_keys("experiment",
                   {"preset", "trials", "base_seed", "n_list", "k_list", "r_list", "beta",
                    "rho", "pup_theta", "lll_theta", "max_rounds_factor"});
    std::string pname = preset_override;
    if (pname.empty()) pname = ini.get("experiment", "preset", "");
    require(!pname.empty(), Status::invalid_input, "no experiment preset given");

    ExperimentPlan plan = ExperimentPlan::preset_defaults(preset_from_string(pname));
    const auto& secs = ini.sections();
    if (secs.count("model") || secs.count("density") || secs.count("categorical") ||
        secs.count("rng")) {
        plan.base = dataset::config_from_ini(ini);
    }
    if (ini.has("experiment", "trials")) {
        plan.trials = static_cast<uint32_t>(ini.get_uint("experiment", "trials", 1));
    }
    plan.base_seed = ini.get_uint("experiment", "base_seed", plan.base_seed);
    if (ini.has("experiment", "n_list")) {
        plan.n_list.clear();
        for (uint64_t n : ini.get_uints("experiment", "n_list")) {
            plan.n_list.push_back(static_cast<uint32_t>(n));
        }
    }
    if (ini.has("experiment", "k_list")) {
        plan.k_list.clear();
        for (uint64_t k : ini.get_uints("experiment", "k_list")) {
            plan.k_list.push_back(static_cast<uint32_t>(k));
        }
    }
    if (ini.has("experiment", "r_list")) plan.r_list = ini.get_doubles("experiment", "r_list");
    plan.beta = ini.get_double("experiment", "beta", plan.beta);
    plan.rho = ini.get_double("experiment", "rho", plan.rho);
    plan.pup_theta = ini.get_double("experiment", "pup_theta", plan.pup_theta);
    plan.lll_theta = ini.get_double("experiment", "lll_theta", plan.lll_theta);
    plan.max_rounds_factor =
        ini.get_uint("experiment", "max_rounds_factor", plan.max_rounds_factor);
    return plan;
}

std::vector<Cell> expand_cells(const ExperimentPlan& plan) {
    std::vector<Cell> cells;
    const std::vector<uint32_t> ks = plan.k_list.empty() ? std::vector<uint32_t>{0}
                                                         : plan.k_list;
    const size_t r_cells = plan.r_list.empty() ? 1 : plan.r_list.size();
    for (uint32_t n : plan.n_list) {
        for (size_t ri = 0; ri < r_cells; ++ri) {
            const double r = cell_radius(plan, n, ri);
            for (uint32_t k : ks) {
                Cell cell;
                cell.index = static_cast<uint32_t>(cells.size());
                cell.n = n;
                cell.k = k;
                cell.r_n = r;
                cell.cfg = resolve_config(plan, n, r);
                cells.push_back(std::move(cell));
            }
        }
    }
    return cells;
}

namespace {

json config_json(const dataset::GeneratorConfig& cfg) {
    json j;
    j["n"] = cfg.n;
    j["d"] = cfg.d;
    j["r_n"] = cfg.r_n;
    j["p0"] = cfg.p0;
    j["p0_means"] = cfg.p0_means == dataset::P0Means::prob_corrupted ? "prob_corrupted"
                                                                     : "prob_uncorrupted";
    json dj;
    dj["kind"] = cfg.density.kind == dataset::DensityKind::two_level ? "two-level"
                                                                     : "uniform-unit-cube";
    if (cfg.density.kind == dataset::DensityKind::two_level) {
        dj["corner"] = cfg.density.corner;
        dj["side"] = cfg.density.side;
        dj["hot_mass"] = cfg.density.hot_mass;
    }
    j["density"] = dj;
    json cj;
    switch (cfg.categorical.kind) {
        case dataset::CategoricalKind::uniform: cj["kind"] = "uniform"; break;
        case dataset::CategoricalKind::two_level:
            cj["kind"] = "two-level";
            cj["top_mass"] = cfg.categorical.top_mass;
            break;
        case dataset::CategoricalKind::power_law:
            cj["kind"] = "power-law";
            cj["exponent"] = cfg.categorical.exponent;
            break;
    }
    cj["cat_size"] = cfg.categorical.cat_size;
    j["categorical"] = cj;
    j["seed"] = cfg.seed;
    return j;
}

dataset::GeneratorConfig config_from_json(const json& j) {
    dataset::GeneratorConfig cfg;
    cfg.n = j.at("n").get<uint32_t>();
    cfg.d = j.at("d").get<uint32_t>();
    cfg.r_n = j.at("r_n").get<double>();
    cfg.p0 = j.at("p0").get<double>();
    cfg.p0_means = j.at("p0_means").get<std::string>() == "prob_corrupted"
                       ? dataset::P0Means::prob_corrupted
                       : dataset::P0Means::prob_uncorrupted;
    const auto& dj = j.at("density");
    if (dj.at("kind").get<std::string>() == "two-level") {
        cfg.density.kind = dataset::DensityKind::two_level;
        cfg.density.corner = dj.at("corner").get<std::vector<double>>();
        cfg.density.side = dj.at("side").get<double>();
        cfg.density.hot_mass = dj.at("hot_mass").get<double>();
    }
    const auto& cj = j.at("categorical");
    const std::string ck = cj.at("kind").get<std::string>();
    if (ck == "two-level") {
        cfg.categorical.kind = dataset::CategoricalKind::two_level;
        cfg.categorical.top_mass = cj.at("top_mass").get<double>();
    } else if (ck == "power-law") {
        cfg.categorical.kind = dataset::CategoricalKind::power_law;
        cfg.categorical.exponent = cj.at("exponent").get<double>();
    }
    cfg.categorical.cat_size = cj.at("cat_size").get<uint32_t>();
    cfg.seed = j.at("seed").get<uint64_t>();
    return cfg;
}

} // namespace

std::string Record::to_jsonl() const {
    json j;
    j["preset"] = preset;
    json cj;
    cj["index"] = cell_index;
    cj["n"] = n;
    cj["k"] = k;
    cj["r_n"] = r_n;
    j["cell"] = cj;
    j["trial"] = trial;
    j["seed"] = seed;
    j["config"] = config_json(config);
    json tj;
    tj["delta"] = delta;
    tj["lambda"] = lambda;
    tj["zeta"] = zeta;
    j["theory"] = tj;
    if (error_status >= 0) {
        json ej;
        ej["status"] = error_status;
        ej["message"] = error_message;
        j["error"] = ej;
    } else {
        json mj;
        for (const auto& [key, val] : measured) mj[key] = val;
        j["measured"] = mj;
    }
    return j.dump();
}

Record Record::from_jsonl(const std::string& line) {
    const json j = json::parse(line);
    Record rec;
    rec.preset = j.at("preset").get<std::string>();
    rec.cell_index = j.at("cell").at("index").get<uint32_t>();
    rec.n = j.at("cell").at("n").get<uint32_t>();
    rec.k = j.at("cell").at("k").get<uint32_t>();
    rec.r_n = j.at("cell").at("r_n").get<double>();
    rec.trial = j.at("trial").get<uint32_t>();
    rec.seed = j.at("seed").get<uint64_t>();
    rec.config = config_from_json(j.at("config"));
    rec.delta = j.at("theory").at("delta").get<double>();
    rec.lambda = j.at("theory").at("lambda").get<double>();
    rec.zeta = j.at("theory").at("zeta").get<double>();
    if (j.contains("error")) {
        rec.error_status = j.at("error").at("status").get<int>();
        rec.error_message = j.at("error").at("message").get<std::string>();
    } else {
        for (const auto& [key, val] : j.at("measured").items()) {
            rec.measured.emplace_back(key, val.get<double>());
        }
    }
    return rec;
}

std::optional<double> Record::value(const std::string& stat) const {
    for (const auto& [key, val] : measured) {
        if (key == stat) return val;
    }
    return std::nullopt;
}

uint64_t trial_seed(uint64_t base_seed, uint32_t cell_index, uint32_t trial_index) {
    return rng::hash3(base_seed, cell_index, trial_index);
}

namespace {

double pick_lll_theta(uint32_t d_hat, uint32_t k) {
    if (d_hat < k) return 1.0;
    static const double ladder[] = {1.0, 1.5, 2.0, 3.0, 4.0,  6.0,  8.0,
                                    12.0, 16.0, 24.0, 32.0, 48.0, 64.0, 96.0};
    for (double theta : ladder) {
        const auto q = static_cast<uint64_t>(
            std::ceil(theta * static_cast<double>(d_hat) / k));
        if (q >= 2 && theory::lll_certificate(d_hat, k, q).feasible) return theta;
    }
    return ladder[std::size(ladder) - 1];
}

Record run_trial(const ExperimentPlan& plan, const Cell& cell, uint32_t trial) {
    Record rec;
    rec.preset = preset_name(plan.preset);
    rec.cell_index = cell.index;
    rec.n = cell.n;
    rec.k = cell.k;
    rec.r_n = cell.r_n;
    rec.trial = trial;
    rec.seed = trial_seed(plan.base_seed, cell.index, trial);
    rec.config = cell.cfg;
    rec.config.seed = rec.seed;

    const auto tp = dataset::theory_params(rec.config);
    const auto [delta, lambda] = theory::delta_lambda(tp);
    rec.delta = delta;
    rec.lambda = lambda;
    const auto probs = rec.config.categorical.probabilities();
    rec.zeta = theory::zeta(tp, std::max<uint32_t>(1, cell.k),
                            rec.config.density.eps_up(rec.config.d), probs);

    try {
        const auto ds = dataset::generate(rec.config);
        const auto g = similarity::SimilarityGraph::build(ds, cell.r_n);
        const uint32_t k = cell.k;
        switch (plan.preset) {
            case Preset::degree_scaling: {
                const auto s = g.degree_stats();
                rec.measured.emplace_back("max_degree", s.max_degree);
                rec.measured.emplace_back("mean_degree", s.mean_degree);
                if (delta > 0.0) {
                    rec.measured.emplace_back("ratio_max_degree_delta",
                                              s.max_degree / delta);
                }
                break;
            }
            case Preset::tau_tradeoff: {
                const auto dec = decomposition::decompose_greedy(g, ds, k);
                const auto lower = decomposition::tau_lower_bound(g, ds, k);
                rec.measured.emplace_back("tau_greedy", dec.size());
                rec.measured.emplace_back("tau_lower", lower);
                rec.measured.emplace_back("k_tau_greedy",
                                          static_cast<double>(k) * dec.size());
                if (delta > 0.0) {
                    rec.measured.emplace_back("ratio_k_tau_delta",
                                              static_cast<double>(k) * dec.size() / delta);
                }
                break;
            }
            case Preset::nsim_bracket: {
                const auto kway = subsets::nsim_greedy_kway(
                    g, k, rng::mix64(rec.seed ^ 0x6b776179ULL));
                const auto upper = subsets::nsim_upper_grid(ds, k, cell.r_n);
                rec.measured.emplace_back("nsim_kway", static_cast<double>(kway.size));
                rec.measured.emplace_back("nsim_upper", static_cast<double>(upper));
                if (kway.size > 0) {
                    rec.measured.emplace_back(
                        "ratio_upper_kway",
                        static_cast<double>(upper) / static_cast<double>(kway.size));
                }
                break;
            }
            case Preset::variance_nsim: {
                const auto exact = subsets::nsim_exact(g, k);
                rec.measured.emplace_back("nsim_exact", static_cast<double>(exact.size));
                break;
            }
            case Preset::variance_tau: {
                const auto [t, dec] = decomposition::tau_exact(g, ds, k);
                (void)dec;
                rec.measured.emplace_back("tau_exact", t);
                break;
            }
            case Preset::lll_termination: {
                const uint32_t d_hat = std::max<uint32_t>(1, g.max_degree());
                const double theta =
                    plan.lll_theta > 0.0 ? plan.lll_theta : pick_lll_theta(d_hat, k);
                const auto out = decomposition::decompose_lll(
                    g, ds, k, theta, rec.seed, plan.max_rounds_factor * cell.n);
                rec.measured.emplace_back("theta_used", theta);
                rec.measured.emplace_back("q", out.q);
                rec.measured.emplace_back("rounds", static_cast<double>(out.rounds));
                rec.measured.emplace_back("repairs", static_cast<double>(out.repairs));
                rec.measured.emplace_back("success", out.dec.has_value() ? 1.0 : 0.0);
                if (out.dec.has_value()) {
                    const auto report = decomposition::check_k_good(g, ds, *out.dec);
                    rec.measured.emplace_back("valid", report.valid ? 1.0 : 0.0);
                    rec.measured.emplace_back("batches", out.dec->size());
                }
                break;
            }
        }
    } catch (const Error& e) {
        rec.error_status = static_cast<int>(e.status());
        rec.error_message = e.what();
    }
    return rec;
}

} // namespace

void run(const ExperimentPlan& plan, std::ostream& sink, unsigned jobs) {
    plan.validate();
    const auto cells = expand_cells(plan);
    const size_t total = cells.size() * plan.trials;
    if (total == 0) return;

    if (jobs <= 1) {
        for (size_t t = 0; t < total; ++t) {
            sink << run_trial(plan, cells[t / plan.trials],
                              static_cast<uint32_t>(t % plan.trials))
                        .to_jsonl()
                 << '\n';
        }
        return;
    }

    std::vector<std::string> lines(total);
    std::vector<uint8_t> done(total, 0);
    std::mutex mu;
    size_t write_ptr = 0;
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t t = next.fetch_add(1);
            if (t >= total) return;
            auto line = run_trial(plan, cells[t / plan.trials],
                                  static_cast<uint32_t>(t % plan.trials))
                            .to_jsonl();
            std::lock_guard<std::mutex> lock(mu);
            lines[t] = std::move(line);
            done[t] = 1;
            while (write_ptr < total && done[write_ptr]) {
                sink << lines[write_ptr] << '\n';
                lines[write_ptr].clear();
                ++write_ptr;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

void run_to_dir(const ExperimentPlan& plan, const std::string& out_dir, unsigned jobs) {
    std::filesystem::create_directories(out_dir);
    const auto path = std::filesystem::path(out_dir) / "records.jsonl";
    std::ofstream out(path, std::ios::binary);
    require(out.good(), Status::invalid_input, "cannot open for writing: " + path.string());
    run(plan, out, jobs);
    require(out.good(), Status::invalid_input, "write failed: " + path.string());
}

std::vector<Record> load_records(std::istream& in) {
    std::vector<Record> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(Record::from_jsonl(line));
    }
    return records;
}

std::vector<Record> load_records_dir(const std::string& dir) {
    require(std::filesystem::is_directory(dir), Status::invalid_input,
            "not a directory: " + dir);
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<Record> records;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        require(in.good(), Status::invalid_input, "cannot open: " + f.string());
        auto part = load_records(in);
        records.insert(records.end(), part.begin(), part.end());
    }
    return records;
}

theory::BoundReport fit_constants(const std::vector<Record>& records) {
    std::set<uint32_t> distinct_n;
    const Record* ref = nullptr;
    for (const auto& rec : records) {
        if (rec.error_status >= 0) continue;
        distinct_n.insert(rec.n);
        if (!ref || rec.n > ref->n || (rec.n == ref->n && rec.k > ref->k)) ref = &rec;
    }
    require(distinct_n.size() >= 2, Status::invalid_input,
            "insufficient data: need records at >= 2 distinct n values");

    struct Family {
        std::vector<double> ratios;
        std::map<uint32_t, std::vector<double>> by_n;
    };
    Family deg, tau, nsim;
    for (const auto& rec : records) {
        if (rec.error_status >= 0) continue;
        if (auto v = rec.value("max_degree"); v && rec.delta > 0.0) {
            const double r = *v / rec.delta;
            deg.ratios.push_back(r);
            deg.by_n[rec.n].push_back(r);
        }
        if (auto v = rec.value("tau_greedy"); v && rec.delta > 0.0 && rec.k >= 1) {
            const double r = *v * rec.k / rec.delta;
            tau.ratios.push_back(r);
            tau.by_n[rec.n].push_back(r);
        }
        if (auto v = rec.value("nsim_kway"); v && rec.k >= 1 && rec.r_n > 0.0) {
            const double scale = static_cast<double>(rec.k) *
                                 rec.config.categorical.cat_size /
                                 std::pow(rec.r_n, static_cast<double>(rec.config.d));
            if (scale > 0.0) {
                const double r = *v / scale;
                nsim.ratios.push_back(r);
                nsim.by_n[rec.n].push_back(r);
            }
        }
    }

    auto fit = [](const Family& f) -> std::pair<std::pair<double, double>, double> {
        if (f.ratios.empty()) return {{0.0, 0.0}, 0.0};
        const auto [lo, hi] = std::minmax_element(f.ratios.begin(), f.ratios.end());
        double med_lo = 0.0, med_hi = 0.0;
        bool first = true;
        for (const auto& [n, v] : f.by_n) {
            (void)n;
            const double m = stats::median(v);
            if (first || m < med_lo) med_lo = m;
            if (first || m > med_hi) med_hi = m;
            first = false;
        }
        const double stability = med_lo > 0.0 ? med_hi / med_lo : 0.0;
        return {{*lo, *hi}, stability};
    };

    theory::BoundReport report;
    report.delta = ref->delta;
    report.lambda = ref->lambda;
    report.zeta = ref->zeta;
    auto [gpair, gstab] = fit(deg);
    auto [tpair, tstab] = fit(tau);
    auto [npair, nstab] = fit(nsim);
    report.gamma_hat = gpair;
    report.lambda_hat = tpair;
    report.nsim_c_hat = npair;
    report.degree_stability = gstab;
    report.tau_stability = tstab;
    report.nsim_stability = nstab;
    report.pred_degree_range = {gpair.first * ref->delta, gpair.second * ref->delta};
    const double ref_k = std::max<uint32_t>(1, ref->k);
    report.pred_tau_range = {tpair.first * ref->delta / ref_k,
                             tpair.second * ref->delta / ref_k};
    const double ref_scale =
        ref->r_n > 0.0
            ? ref_k * ref->config.categorical.cat_size /
                  std::pow(ref->r_n, static_cast<double>(ref->config.d))
            : 0.0;
    report.pred_nsim_range = {npair.first * ref_scale, npair.second * ref_scale};
    report.degenerate = (!deg.ratios.empty() && gpair.first == gpair.second) ||
                        (!tau.ratios.empty() && tpair.first == tpair.second) ||
                        (!nsim.ratios.empty() && npair.first == npair.second);
    return report;
}

namespace {

std::string fmt(double v) {
    std::ostringstream o;
    o.precision(6);
    o << v;
    return o.str();
}

// Per-cell grouped values of one statistic.
std::map<uint32_t, std::vector<double>> collect_by_cell(const std::vector<Record>& records,
                                                        const std::string& stat) {
    std::map<uint32_t, std::vector<double>> out;
    for (const auto& rec : records) {
        if (auto v = rec.value(stat)) out[rec.cell_index].push_back(*v);
    }
    return out;
}

} // namespace

std::vector<CheckResult> evaluate_checks(const std::vector<Record>& records) {
    std::vector<CheckResult> checks;
    auto add = [&](const std::string& name, bool pass, const std::string& detail) {
        checks.push_back({name, pass, detail});
    };

    // Band stability of max_degree / delta across n.
    {
        std::map<uint32_t, std::vector<double>> by_n;
        for (const auto& rec : records) {
            if (auto v = rec.value("ratio_max_degree_delta")) by_n[rec.n].push_back(*v);
        }
        if (by_n.size() >= 2) {
            double lo = 0.0, hi = 0.0;
            bool first = true;
            for (const auto& [n, v] : by_n) {
                (void)n;
                const double m = stats::median(v);
                if (first || m < lo) lo = m;
                if (first || m > hi) hi = m;
                first = false;
            }
            const double ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
            add("degree-band", ratio < thresholds::degree_band,
                "max/min of per-n median(max_degree/delta) = " + fmt(ratio) + " vs " +
                    fmt(thresholds::degree_band));
        }
    }

    // k * tau stays flat across k.
    {
        std::map<uint32_t, std::vector<double>> by_k;
        for (const auto& rec : records) {
            if (auto v = rec.value("k_tau_greedy")) by_k[rec.k].push_back(*v);
        }
        if (by_k.size() >= 2) {
            double lo = 0.0, hi = 0.0;
            bool first = true;
            for (const auto& [k, v] : by_k) {
                (void)k;
                const double m = stats::median(v);
                if (first || m < lo) lo = m;
                if (first || m > hi) hi = m;
                first = false;
            }
            const double ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
            add("tau-band", ratio < thresholds::tau_band,
                "max/min of per-k median(k*tau_greedy) = " + fmt(ratio) + " vs " +
                    fmt(thresholds::tau_band));
        }
    }

    // Grid upper bound vs k-way greedy bracket.
    {
        const auto cells = collect_by_cell(records, "ratio_upper_kway");
        if (!cells.empty()) {
            double worst = 0.0;
            for (const auto& [cell, v] : cells) {
                (void)cell;
                worst = std::max(worst, stats::median(v));
            }
            add("nsim-ratio", worst < thresholds::nsim_ratio_max,
                "worst per-cell median(nsim_upper/nsim_kway) = " + fmt(worst) + " vs " +
                    fmt(thresholds::nsim_ratio_max));
        }

        // Linearity in k of both sides, per n.
        std::map<uint32_t, std::map<uint32_t, std::vector<double>>> kway_by_nk, up_by_nk;
        for (const auto& rec : records) {
            if (rec.k == 0) continue;
            if (auto v = rec.value("nsim_kway")) kway_by_nk[rec.n][rec.k].push_back(*v / rec.k);
            if (auto v = rec.value("nsim_upper")) up_by_nk[rec.n][rec.k].push_back(*v / rec.k);
        }
        auto k_stability = [](const std::map<uint32_t, std::map<uint32_t, std::vector<double>>>&
                                  by_nk) {
            double worst = 1.0;
            for (const auto& [n, by_k] : by_nk) {
                (void)n;
                if (by_k.size() < 2) continue;
                double lo = 0.0, hi = 0.0;
                bool first = true;
                for (const auto& [k, v] : by_k) {
                    (void)k;
                    const double m = stats::median(v);
                    if (first || m < lo) lo = m;
                    if (first || m > hi) hi = m;
                    first = false;
                }
                worst = std::max(worst, lo > 0.0 ? hi / lo
                                                 : std::numeric_limits<double>::infinity());
            }
            return worst;
        };
        if (!kway_by_nk.empty() && kway_by_nk.begin()->second.size() >= 2) {
            const double a = k_stability(kway_by_nk);
            const double b = k_stability(up_by_nk);
            add("nsim-k-linearity",
                a < thresholds::nsim_k_stability && b < thresholds::nsim_k_stability,
                "per-k stability: kway = " + fmt(a) + ", upper = " + fmt(b) + " vs " +
                    fmt(thresholds::nsim_k_stability));
        }
    }

    // var(N_sim) <= 4 E N_sim within jackknife noise, per k cell.
    {
        std::map<uint32_t, std::vector<double>> by_cell;
        for (const auto& rec : records) {
            if (auto v = rec.value("nsim_exact")) by_cell[rec.cell_index].push_back(*v);
        }
        for (const auto& [cell, v] : by_cell) {
            if (v.size() < 10) continue;
            const double var = stats::sample_variance(v);
            const double mu = stats::mean(v);
            const double se = stats::jackknife_se_var_minus_mean(v, thresholds::variance_factor);
            const double slack = var - thresholds::variance_factor * mu;
            add("variance-nsim-law(cell " + std::to_string(cell) + ")",
                slack <= thresholds::variance_se_mult * se,
                "var = " + fmt(var) + ", 4*mean = " + fmt(4.0 * mu) + ", 3*SE = " +
                    fmt(thresholds::variance_se_mult * se));
        }
    }

    // Relative variance of tau_exact shrinks as delta grows.
    {
        std::map<uint32_t, std::vector<double>> by_cell;
        std::map<uint32_t, double> cell_delta;
        for (const auto& rec : records) {
            if (auto v = rec.value("tau_exact")) {
                by_cell[rec.cell_index].push_back(*v);
                cell_delta[rec.cell_index] = rec.delta;
            }
        }
        if (by_cell.size() >= 2) {
            std::vector<std::pair<double, double>> delta_relvar;
            for (const auto& [cell, v] : by_cell) {
                const double mu = stats::mean(v);
                const double relvar = mu > 0.0 ? stats::sample_variance(v) / (mu * mu) : 0.0;
                delta_relvar.emplace_back(cell_delta[cell], relvar);
            }
            std::sort(delta_relvar.begin(), delta_relvar.end());
            bool pass = true;
            std::string detail = "relvar by delta:";
            for (size_t i = 0; i < delta_relvar.size(); ++i) {
                detail += " " + fmt(delta_relvar[i].first) + "->" +
                          fmt(delta_relvar[i].second);
                if (i > 0 && delta_relvar[i].second > delta_relvar[i - 1].second) pass = false;
            }
            add("variance-tau-relvar", pass, detail);
        }
    }

    // Resampler termination rate and output validity.
    {
        std::vector<double> succ, valid;
        for (const auto& rec : records) {
            if (auto v = rec.value("success")) {
                succ.push_back(*v);
                if (*v > 0.5) valid.push_back(rec.value("valid").value_or(0.0));
            }
        }
        if (!succ.empty()) {
            const double rate = stats::mean(succ);
            bool all_valid = true;
            for (double v : valid) {
                if (v < 0.5) all_valid = false;
            }
            add("lll-termination", rate >= thresholds::lll_success_rate && all_valid,
                "success rate = " + fmt(rate) + " vs " + fmt(thresholds::lll_success_rate) +
                    ", outputs valid = " + (all_valid ? "yes" : "no"));
        }
    }

    return checks;
}

ReportOutput report(const std::vector<Record>& records) {
    static const std::set<std::string> surrogate_stats = {
        "tau_greedy", "k_tau_greedy", "ratio_k_tau_delta", "tau_lower",
        "nsim_kway",  "nsim_upper",   "ratio_upper_kway"};

    // Cell metadata and per-stat samples, keyed by (preset, cell).
    struct CellAgg {
        std::string preset;
        uint32_t n = 0, k = 0;
        double r_n = 0.0;
        std::vector<std::string> stat_order;
        std::map<std::string, std::vector<double>> samples;
        std::vector<double> delta;
        uint64_t errors = 0;
    };
    std::map<std::pair<std::string, uint32_t>, CellAgg> cells;
    for (const auto& rec : records) {
        auto& agg = cells[{rec.preset, rec.cell_index}];
        agg.preset = rec.preset;
        agg.n = rec.n;
        agg.k = rec.k;
        agg.r_n = rec.r_n;
        agg.delta.push_back(rec.delta);
        if (rec.error_status >= 0) {
            ++agg.errors;
            continue;
        }
        for (const auto& [key, val] : rec.measured) {
            if (!agg.samples.count(key)) agg.stat_order.push_back(key);
            agg.samples[key].push_back(val);
        }
    }

    std::ostringstream csv;
    csv << "preset,cell,n,k,r_n,stat,kind,count,median,q1,q3\n";
    std::ostringstream txt;
    txt << "experiment report\n";
    txt << "records: " << records.size() << "\n";
    txt << "stat kinds: [s] surrogate, [e] exact measurement\n";

    std::string last_preset;
    for (const auto& [key, agg] : cells) {
        if (agg.preset != last_preset) {
            txt << "\n== preset: " << agg.preset << " ==\n";
            last_preset = agg.preset;
        }
        txt << "cell " << key.second << ": n=" << agg.n << " k=" << agg.k
            << " r_n=" << fmt(agg.r_n) << " delta=" << fmt(stats::median(agg.delta));
        if (agg.errors > 0) txt << " errors=" << agg.errors;
        txt << "\n";
        for (const auto& stat : agg.stat_order) {
            const auto& v = agg.samples.at(stat);
            const double med = stats::median(v);
            const auto [q1, q3] = stats::iqr(v);
            const bool surrogate = surrogate_stats.count(stat) > 0;
            txt << "  " << (surrogate ? "[s] " : "[e] ") << stat << ": median=" << fmt(med)
                << " iqr=[" << fmt(q1) << ", " << fmt(q3) << "] count=" << v.size() << "\n";
            csv << agg.preset << ',' << key.second << ',' << agg.n << ',' << agg.k << ','
                << fmt(agg.r_n) << ',' << stat << ',' << (surrogate ? "surrogate" : "exact")
                << ',' << v.size() << ',' << fmt(med) << ',' << fmt(q1) << ',' << fmt(q3)
                << "\n";
        }
    }

    try {
        const auto fitted = fit_constants(records);
        txt << "\nfitted constants (reference delta=" << fmt(fitted.delta) << "):\n";
        if (fitted.gamma_hat.second > 0.0) {
            txt << "  gamma_hat = [" << fmt(fitted.gamma_hat.first) << ", "
                << fmt(fitted.gamma_hat.second)
                << "] stability=" << fmt(fitted.degree_stability) << "\n";
        }
        if (fitted.lambda_hat.second > 0.0) {
            txt << "  lambda_hat = [" << fmt(fitted.lambda_hat.first) << ", "
                << fmt(fitted.lambda_hat.second)
                << "] stability=" << fmt(fitted.tau_stability) << "\n";
        }
        if (fitted.nsim_c_hat.second > 0.0) {
            txt << "  nsim_c_hat = [" << fmt(fitted.nsim_c_hat.first) << ", "
                << fmt(fitted.nsim_c_hat.second)
                << "] stability=" << fmt(fitted.nsim_stability) << "\n";
        }
        if (fitted.degenerate) txt << "  warning: degenerate fit (single instance family)\n";
    } catch (const Error&) {
        // Not enough spread to fit anything; medians above still stand.
    }

    const auto checks = evaluate_checks(records);
    if (!checks.empty()) {
        txt << "\nchecks:\n";
        for (const auto& c : checks) {
            txt << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
        }
    }

    return {txt.str(), csv.str()};
}

void report_to_dir(const std::vector<Record>& records, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto out = report(records);
    const auto txt_path = std::filesystem::path(out_dir) / "summary.txt";
    const auto csv_path = std::filesystem::path(out_dir) / "summary.csv";
    std::ofstream t(txt_path, std::ios::binary);
    require(t.good(), Status::invalid_input, "cannot open: " + txt_path.string());
    t << out.text;
    std::ofstream c(csv_path, std::ios::binary);
    require(c.good(), Status::invalid_input, "cannot open: " + csv_path.string());
    c << out.csv;
    require(t.good() && c.good(), Status::invalid_input, "report write failed");
}

} // namespace bd::harness
