#ifndef BD_THEORY_HPP
#define BD_THEORY_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "core/common.hpp"

namespace bd::theory {

// Model parameters every closed-form quantity is computed from. p0 is the
// probability that a point is corrupted (the convention used by all bound
// formulas; see dataset::GeneratorConfig for the generator-side flag).
struct TheoryParams {
    uint64_t n = 1;
    uint32_t d = 1;
    double r_n = 0.0;
    double p0 = 0.0;
    double p_up = 1.0;
    double p_low = 1.0;
    uint32_t cat_size = 1;

    void validate() const;
};

// Growth scales for the maximum similarity-set size. delta == lambda exactly
// when p0 == 0.
std::pair<double, double> delta_lambda(const TheoryParams& p);

// Volume of the unit ball in d dimensions.
double unit_ball_volume(uint32_t d);

// Average categorical survival factor: mean over symbols of
// exp(-eps_up * pi_d * n * r_n^d * p(y) / k).
double zeta(const TheoryParams& p, uint32_t k, double eps_up,
            std::span<const double> cat_probs);

// Two-sided relative-deviation tail for a Bernoulli sum with mean theta:
// 2 * exp(-gamma^2 * theta / 4), valid for gamma in (0, 1/2].
double chernoff_tail(double theta, double gamma);

struct LllCertificate {
    bool feasible = false;           // e * p * (D + 1) <= 1
    bool theta_sufficient = false;   // q >= 8 e d_hat / k
    double event_prob = 0.0;         // q^-k (may underflow to 0)
    double log_event_prob = 0.0;
    uint64_t dependency_degree = 0;  // saturates at UINT64_MAX
    double log_dependency_degree = 0.0;
    double log_lhs = 0.0;            // log(e * p * (D + 1))
};

// Symmetric local-lemma check for assigning points with max similarity degree
// d_hat into q batches with per-batch budget k. Evaluates entirely in log
// space; d_hat ~ 1e4 is fine.
LllCertificate lll_certificate(uint64_t max_degree, uint64_t k, uint64_t q);

// Fitted scaling constants plus the ranges they predict at one parameter
// point. The absolute constants are unspecified in the underlying bounds, so
// these are always empirical estimates produced by the harness.
struct BoundReport {
    double delta = 0.0;
    double lambda = 0.0;
    double zeta = 1.0;
    std::pair<double, double> gamma_hat{0.0, 0.0};    // max_degree / delta
    std::pair<double, double> lambda_hat{0.0, 0.0};   // tau * k / delta
    std::pair<double, double> nsim_c_hat{0.0, 0.0};   // nsim * r^d / (k * #Y)
    std::pair<double, double> pred_degree_range{0.0, 0.0};
    std::pair<double, double> pred_tau_range{0.0, 0.0};
    std::pair<double, double> pred_nsim_range{0.0, 0.0};
    double degree_stability = 0.0;  // max/min of per-n medians
    double tau_stability = 0.0;
    double nsim_stability = 0.0;
    bool degenerate = false;        // fitted from a single instance family
};

} // namespace bd::theory

#endif
