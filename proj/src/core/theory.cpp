#include "core/theory.hpp"

#include <cmath>
#include <limits>

namespace bd::theory {

void TheoryParams::validate() const {
    require(n >= 1, Status::invalid_input, "n must be >= 1");
    require(d >= 1, Status::invalid_input, "d must be >= 1");
    require(r_n >= 0.0, Status::invalid_input, "r_n must be >= 0");
    require(p0 >= 0.0 && p0 <= 1.0, Status::invalid_input, "p0 must be in [0,1]");
    require(cat_size >= 1, Status::invalid_input, "cat_size must be >= 1");
    require(p_up > 0.0 && p_up <= 1.0, Status::invalid_input, "p_up must be in (0,1]");
    require(p_low > 0.0 && p_low <= 1.0, Status::invalid_input, "p_low must be in (0,1]");
    const double inv = 1.0 / static_cast<double>(cat_size);
    require(p_low <= inv + 1e-12 && inv <= p_up + 1e-12, Status::invalid_input,
            "need p_low <= 1/cat_size <= p_up");
}

std::pair<double, double> delta_lambda(const TheoryParams& p) {
    p.validate();
    const double scale = static_cast<double>(p.n) * p.p_up;
    const double geom = std::pow(p.r_n, static_cast<double>(p.d)) * (1.0 - p.p0);
    if (p.p0 == 0.0) {
        // Both branches collapse to n * p_up * r_n^d; computed once so the
        // pair is bit-equal.
        const double v = scale * geom;
        return {v, v};
    }
    return {scale * std::max(geom, p.p0), scale * std::min(geom, p.p0)};
}

double unit_ball_volume(uint32_t d) {
    const double hd = static_cast<double>(d) / 2.0;
    return std::exp(hd * std::log(M_PI) - std::lgamma(hd + 1.0));
}

double zeta(const TheoryParams& p, uint32_t k, double eps_up,
            std::span<const double> cat_probs) {
    p.validate();
    require(k >= 1, Status::invalid_input, "k must be >= 1");
    require(eps_up > 0.0, Status::invalid_input, "eps_up must be > 0");
    require(!cat_probs.empty(), Status::invalid_input, "cat_probs must be non-empty");
    double sum = 0.0;
    for (double q : cat_probs) {
        require(q >= 0.0, Status::invalid_input, "cat_probs entries must be >= 0");
        sum += q;
    }
    require(std::abs(sum - 1.0) <= 1e-9, Status::invalid_input,
            "cat_probs must sum to 1");

    const double pi_d = unit_ball_volume(p.d);
    const double base = eps_up * pi_d * static_cast<double>(p.n) *
                        std::pow(p.r_n, static_cast<double>(p.d)) /
                        static_cast<double>(k);
    double acc = 0.0;
    for (double q : cat_probs) acc += std::exp(-base * q);
    return acc / static_cast<double>(cat_probs.size());
}

double chernoff_tail(double theta, double gamma) {
    require(theta >= 0.0, Status::invalid_input, "theta must be >= 0");
    require(gamma > 0.0 && gamma <= 0.5, Status::invalid_input,
            "gamma must be in (0, 1/2]");
    return 2.0 * std::exp(-gamma * gamma * theta / 4.0);
}

LllCertificate lll_certificate(uint64_t max_degree, uint64_t k, uint64_t q) {
    require(k >= 1, Status::invalid_input, "k must be >= 1");
    require(q >= 2, Status::invalid_input, "q must be >= 2");
    require(max_degree >= k, Status::invalid_input, "max_degree must be >= k");

    const double dk = static_cast<double>(k);
    const double dd = static_cast<double>(max_degree);
    const double dq = static_cast<double>(q);

    LllCertificate cert;
    cert.log_event_prob = -dk * std::log(dq);
    cert.event_prob = std::exp(cert.log_event_prob);

    // D = (k+1) * L with L = (max_degree * e / k)^k, the count of bad
    // (k+1)-subsets any one subset can intersect.
    const double log_l = dk * (1.0 + std::log(dd) - std::log(dk));
    cert.log_dependency_degree = std::log(dk + 1.0) + log_l;
    if (cert.log_dependency_degree < 63.0 * std::log(2.0)) {
        cert.dependency_degree =
            static_cast<uint64_t>(std::llround(std::exp(cert.log_dependency_degree)));
    } else {
        cert.dependency_degree = std::numeric_limits<uint64_t>::max();
    }

    // log(D + 1) without leaving log space.
    const double log_d1 =
        cert.log_dependency_degree + std::log1p(std::exp(-cert.log_dependency_degree));
    cert.log_lhs = 1.0 + cert.log_event_prob + log_d1;
    cert.feasible = cert.log_lhs <= 0.0;
    cert.theta_sufficient = dq * dk >= 8.0 * M_E * dd;
    return cert;
}

} // namespace bd::theory
