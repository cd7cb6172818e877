#ifndef BD_DATASET_HPP
#define BD_DATASET_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/config.hpp"
#include "core/theory.hpp"

namespace bd::dataset {

enum class DensityKind { uniform_unit_cube, two_level };

// Continuous-part law. Supports live inside the unit cube; two-level puts
// probability hot_mass uniformly on an axis-aligned sub-cube S0 (given corner
// and side) and the rest uniformly on the complement.
struct DensitySpec {
    DensityKind kind = DensityKind::uniform_unit_cube;
    std::vector<double> corner;  // two-level only, d entries
    double side = 0.25;          // two-level S0 side length
    double hot_mass = 0.5;

    void validate(uint32_t d) const;
    double eps_low(uint32_t d) const;  // density lower bound inside S0
    double eps_up(uint32_t d) const;   // global density upper bound
};

enum class CategoricalKind { uniform, two_level, power_law };

struct CategoricalSpec {
    CategoricalKind kind = CategoricalKind::uniform;
    uint32_t cat_size = 1;
    double top_mass = 0.5;    // two-level: mass of symbol 0
    double exponent = 1.0;    // power-law: p(y) ~ (y+1)^-exponent

    void validate() const;
    std::vector<double> probabilities() const;
    double p_up() const;
    double p_low() const;
};

// Which probability the p0 field carries. The model's delta flag is drawn
// with P(delta = 1) = p0 and delta = 1 means uncorrupted, so the default
// reads p0 as the probability of staying uncorrupted; all bound formulas use
// the corrupted probability, so harness-written configs set prob_corrupted.
enum class P0Means { prob_uncorrupted, prob_corrupted };

struct GeneratorConfig {
    uint32_t n = 1;
    uint32_t d = 1;
    double r_n = 0.0;
    double p0 = 1.0;
    P0Means p0_means = P0Means::prob_uncorrupted;
    DensitySpec density;
    CategoricalSpec categorical;
    uint64_t seed = 0;

    double corruption_probability() const {
        return p0_means == P0Means::prob_corrupted ? p0 : 1.0 - p0;
    }
    void validate() const;
};

struct DataPoint {
    uint32_t index = 0;
    std::vector<double> x;  // NaN-filled when corrupted
    uint32_t y = 0;
    bool corrupted = false;
};

class Dataset {
public:
    Dataset(GeneratorConfig cfg, std::vector<double> xs, std::vector<uint32_t> ys,
            std::vector<uint8_t> corrupted);

    uint32_t size() const { return cfg_.n; }
    uint32_t dim() const { return cfg_.d; }
    uint32_t cat_size() const { return cat_size_; }

    std::span<const double> x(uint32_t i) const {
        return {xs_.data() + static_cast<size_t>(i) * cfg_.d, cfg_.d};
    }
    uint32_t y(uint32_t i) const { return ys_[i]; }
    bool corrupted(uint32_t i) const { return corrupted_[i] != 0; }
    DataPoint point(uint32_t i) const;

    const GeneratorConfig& config() const { return cfg_; }

    // Point-wise equality (flags, categories, and uncorrupted coordinates
    // bit-for-bit). Configs are not compared; CSV files carry points only.
    bool same_points(const Dataset& other) const;

private:
    GeneratorConfig cfg_;
    std::vector<double> xs_;
    std::vector<uint32_t> ys_;
    std::vector<uint8_t> corrupted_;
    uint32_t cat_size_ = 1;
};

Dataset generate(const GeneratorConfig& cfg);

Dataset load_csv(const std::string& path);
void save_csv(const Dataset& ds, const std::string& path);

struct Summary {
    uint32_t n = 0;
    uint32_t d = 0;
    double frac_corrupted = 0.0;
    double p_up_hat = 0.0;   // max observed category frequency
    double p_low_hat = 0.0;  // min observed (nonzero) category frequency
    std::vector<uint64_t> histogram;

    std::string to_text() const;
};

Summary summary(const Dataset& ds);

GeneratorConfig config_from_ini(const config::Ini& ini);
std::string config_to_ini(const GeneratorConfig& cfg);

// Bound parameters implied by a config; p0 is always the corruption
// probability here.
theory::TheoryParams theory_params(const GeneratorConfig& cfg);

} // namespace bd::dataset

#endif
