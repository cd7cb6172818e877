#ifndef BD_HARNESS_HPP
#define BD_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/dataset.hpp"
#include "core/theory.hpp"

namespace bd::harness {

enum class Preset {
    degree_scaling,
    tau_tradeoff,
    nsim_bracket,
    variance_nsim,
    variance_tau,
    lll_termination,
};

Preset preset_from_string(const std::string& name);
std::string preset_name(Preset p);

// Band-stability thresholds the reports grade against. The underlying bounds
// are order-of-magnitude with unspecified constants, so these are fixed
// acceptance bands, not point predictions.
namespace thresholds {
inline constexpr double degree_band = 2.0;       // max/min of per-n medians
inline constexpr double tau_band = 3.0;          // max/min of per-k medians of k*tau
inline constexpr double nsim_ratio_max = 8.0;    // grid upper / kway greedy
inline constexpr double nsim_k_stability = 2.0;  // per-k medians of stat/k
inline constexpr double variance_factor = 4.0;   // var <= 4 * mean
inline constexpr double variance_se_mult = 3.0;
inline constexpr double lll_success_rate = 0.95;
} // namespace thresholds

struct ExperimentPlan {
    Preset preset = Preset::degree_scaling;
    uint32_t trials = 1;
    uint64_t base_seed = 0;
    std::vector<uint32_t> n_list;
    std::vector<uint32_t> k_list;
    std::vector<double> r_list;     // explicit radii; otherwise r_n = n^-beta
    double beta = 0.0;              // radius exponent (used when r_list empty)
    double rho = 0.0;               // cat_size = round(n^rho) when > 0
    double pup_theta = 0.0;         // two-level top mass = n^-pup_theta when > 0
    double lll_theta = 0.0;         // 0 = smallest certificate-feasible theta
    uint64_t max_rounds_factor = 50;
    dataset::GeneratorConfig base;  // n, r_n and categorical size overridden per cell

    static ExperimentPlan preset_defaults(Preset p);
    // Regime guards; throws invalid_input naming the violated condition.
    void validate() const;
};

ExperimentPlan plan_from_ini(const config::Ini& ini,
                             const std::string& preset_override = "");

struct Cell {
    uint32_t index = 0;
    uint32_t n = 0;
    uint32_t k = 0;  // 0 when the preset has no k axis
    double r_n = 0.0;
    dataset::GeneratorConfig cfg;  // resolved; seed filled per trial
};

std::vector<Cell> expand_cells(const ExperimentPlan& plan);

// One trial's result; self-contained (config snapshot + seed re-runs it).
struct Record {
    std::string preset;
    uint32_t cell_index = 0;
    uint32_t n = 0;
    uint32_t k = 0;
    double r_n = 0.0;
    uint32_t trial = 0;
    uint64_t seed = 0;
    dataset::GeneratorConfig config;
    double delta = 0.0;
    double lambda = 0.0;
    double zeta = 1.0;
    std::vector<std::pair<std::string, double>> measured;
    int error_status = -1;  // >= 0 when the trial failed
    std::string error_message;

    std::string to_jsonl() const;
    static Record from_jsonl(const std::string& line);
    std::optional<double> value(const std::string& stat) const;
};

uint64_t trial_seed(uint64_t base_seed, uint32_t cell_index, uint32_t trial_index);

// Executes all (cell, trial) tasks and streams one JSON object per line, in
// (cell, trial) order regardless of the worker count.
void run(const ExperimentPlan& plan, std::ostream& sink, unsigned jobs = 1);
void run_to_dir(const ExperimentPlan& plan, const std::string& out_dir, unsigned jobs = 1);

std::vector<Record> load_records(std::istream& in);
std::vector<Record> load_records_dir(const std::string& dir);

// Empirical scaling constants from a record set; needs at least two distinct
// n values.
theory::BoundReport fit_constants(const std::vector<Record>& records);

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Grades whatever preset statistics are present against the thresholds above.
std::vector<CheckResult> evaluate_checks(const std::vector<Record>& records);

struct ReportOutput {
    std::string text;
    std::string csv;
};

ReportOutput report(const std::vector<Record>& records);
void report_to_dir(const std::vector<Record>& records, const std::string& out_dir);

namespace stats {
double median(std::vector<double> v);
std::pair<double, double> iqr(std::vector<double> v);  // (q1, q3)
double mean(const std::vector<double>& v);
double sample_variance(const std::vector<double>& v);
// Jackknife standard error of sample_variance(x) - factor * mean(x).
double jackknife_se_var_minus_mean(const std::vector<double>& v, double factor);
} // namespace stats

} // namespace bd::harness

#endif
