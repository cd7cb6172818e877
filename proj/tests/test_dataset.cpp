#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "core/dataset.hpp"
#include "core/theory.hpp"

using namespace bd;
using namespace bd::dataset;

namespace {

GeneratorConfig basic(uint32_t n, uint32_t d, uint32_t cats, uint64_t seed) {
    GeneratorConfig cfg;
    cfg.n = n;
    cfg.d = d;
    cfg.r_n = 0.1;
    cfg.categorical.cat_size = cats;
    cfg.seed = seed;
    return cfg;
}

// Relative tolerance gamma with two-sided tail below `target` for a
// Bernoulli sum of mean theta.
double chernoff_gamma(double theta, double target) {
    const double g = std::sqrt(4.0 * std::log(2.0 / target) / theta);
    return std::min(g, 0.5);
}

std::filesystem::path tmp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

std::string write_tmp(const std::string& name, const std::string& content) {
    auto p = tmp_file(name);
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p.string();
}

} // namespace

TEST_CASE("p0 conventions") {
    // Default: p0 is the probability of the flag meaning 'uncorrupted'.
    auto cfg = basic(5, 2, 1, 7);
    cfg.p0 = 1.0;
    auto all_clean = generate(cfg);
    for (uint32_t i = 0; i < 5; ++i) CHECK_FALSE(all_clean.corrupted(i));

    cfg.p0 = 0.0;
    auto all_corrupt = generate(cfg);
    for (uint32_t i = 0; i < 5; ++i) CHECK(all_corrupt.corrupted(i));

    cfg.p0 = 1.0;
    cfg.p0_means = P0Means::prob_corrupted;
    auto flipped = generate(cfg);
    for (uint32_t i = 0; i < 5; ++i) CHECK(flipped.corrupted(i));
    CHECK(cfg.corruption_probability() == 1.0);

    cfg.p0_means = P0Means::prob_uncorrupted;
    CHECK(cfg.corruption_probability() == 0.0);
}

TEST_CASE("corrupted points carry the missing marker") {
    auto cfg = basic(64, 3, 2, 11);
    cfg.p0 = 0.5;
    cfg.p0_means = P0Means::prob_corrupted;
    auto ds = generate(cfg);
    bool saw_corrupted = false;
    for (uint32_t i = 0; i < ds.size(); ++i) {
        if (ds.corrupted(i)) {
            saw_corrupted = true;
            for (double v : ds.x(i)) CHECK(std::isnan(v));
        } else {
            for (double v : ds.x(i)) CHECK((v >= 0.0 && v < 1.0));
        }
    }
    CHECK(saw_corrupted);
}

TEST_CASE("determinism and seed sensitivity") {
    auto cfg = basic(256, 2, 4, 99);
    cfg.p0 = 0.2;
    cfg.p0_means = P0Means::prob_corrupted;
    auto a = generate(cfg);
    auto b = generate(cfg);
    CHECK(a.same_points(b));

    cfg.seed = 100;
    auto c = generate(cfg);
    CHECK_FALSE(a.same_points(c));
}

TEST_CASE("per-point streams independent of corruption setting") {
    auto clean_cfg = basic(512, 2, 4, 2024);
    clean_cfg.p0 = 0.0;
    clean_cfg.p0_means = P0Means::prob_corrupted;
    auto clean = generate(clean_cfg);

    auto noisy_cfg = clean_cfg;
    noisy_cfg.p0 = 0.5;
    auto noisy = generate(noisy_cfg);

    for (uint32_t i = 0; i < clean.size(); ++i) {
        CHECK(clean.y(i) == noisy.y(i));
        if (!noisy.corrupted(i)) {
            CHECK(clean.x(i)[0] == noisy.x(i)[0]);
            CHECK(clean.x(i)[1] == noisy.x(i)[1]);
        }
    }
}

TEST_CASE("category frequencies concentrate") {
    auto cfg = basic(10000, 2, 4, 31337);
    cfg.p0 = 0.0;
    cfg.p0_means = P0Means::prob_corrupted;
    auto ds = generate(cfg);
    auto s = summary(ds);
    const double gamma = chernoff_gamma(10000.0 / 4.0, 1e-6);
    for (uint64_t c : s.histogram) {
        CHECK(std::abs(static_cast<double>(c) / 10000.0 - 0.25) <= gamma * 0.25);
    }
}

TEST_CASE("two-level density mass concentrates") {
    auto cfg = basic(20000, 2, 1, 5);
    cfg.p0 = 0.0;
    cfg.p0_means = P0Means::prob_corrupted;
    cfg.density.kind = DensityKind::two_level;
    cfg.density.corner = {0.1, 0.2};
    cfg.density.side = 0.3;
    cfg.density.hot_mass = 0.6;
    auto ds = generate(cfg);

    uint64_t inside = 0;
    for (uint32_t i = 0; i < ds.size(); ++i) {
        auto x = ds.x(i);
        bool in = true;
        for (uint32_t j = 0; j < 2; ++j) {
            if (x[j] < cfg.density.corner[j] ||
                x[j] >= cfg.density.corner[j] + cfg.density.side) {
                in = false;
            }
        }
        if (in) ++inside;
    }
    const double gamma = chernoff_gamma(20000.0 * 0.6, 1e-6);
    CHECK(std::abs(inside / 20000.0 - 0.6) <= gamma * 0.6);

    CHECK(cfg.density.eps_low(2) == doctest::Approx(0.6 / 0.09));
    CHECK(cfg.density.eps_up(2) == doctest::Approx(0.6 / 0.09));
}

TEST_CASE("corruption frequency concentrates") {
    auto cfg = basic(20000, 1, 1, 77);
    cfg.p0 = 0.3;
    cfg.p0_means = P0Means::prob_corrupted;
    auto ds = generate(cfg);
    auto s = summary(ds);
    const double gamma = chernoff_gamma(20000.0 * 0.3, 1e-6);
    CHECK(std::abs(s.frac_corrupted - 0.3) <= gamma * 0.3);
}

TEST_CASE("csv round trip") {
    auto cfg = basic(100, 3, 5, 404);
    cfg.p0 = 0.25;
    cfg.p0_means = P0Means::prob_corrupted;
    auto ds = generate(cfg);
    auto path = tmp_file("bd_roundtrip.csv").string();
    save_csv(ds, path);
    auto loaded = load_csv(path);
    CHECK(loaded.same_points(ds));
    std::filesystem::remove(path);
}

TEST_CASE("csv round trip across random configs") {
    rng::SplitMix64 g(8);
    for (int t = 0; t < 20; ++t) {
        auto cfg = basic(1 + static_cast<uint32_t>(g.next_below(64)),
                         1 + static_cast<uint32_t>(g.next_below(4)),
                         1 + static_cast<uint32_t>(g.next_below(6)), g.next());
        cfg.p0 = g.next_double();
        cfg.p0_means = P0Means::prob_corrupted;
        auto ds = generate(cfg);
        auto path = tmp_file("bd_roundtrip_prop.csv").string();
        save_csv(ds, path);
        CHECK(load_csv(path).same_points(ds));
        std::filesystem::remove(path);
    }
}

TEST_CASE("csv load rejects malformed input") {
    // Missing one coordinate: d mismatch, row named.
    auto p1 = write_tmp("bd_bad1.csv", "idx,corrupted,y,x0,x1\n0,0,0,0.5\n");
    CHECK_THROWS_WITH_AS(load_csv(p1), doctest::Contains("row 1"), Error);

    // Category id out of range.
    auto p2 = write_tmp("bd_bad2.csv", "idx,corrupted,y,x0\n0,0,-3,0.5\n");
    CHECK_THROWS_WITH_AS(load_csv(p2), doctest::Contains("category id out of range"), Error);

    // Corrupted row must leave x cells empty; loads as corrupted otherwise.
    auto p3 = write_tmp("bd_bad3.csv", "idx,corrupted,y,x0\n0,1,0,0.5\n");
    CHECK_THROWS_WITH_AS(load_csv(p3), doctest::Contains("empty"), Error);

    auto p4 = write_tmp("bd_ok.csv", "idx,corrupted,y,x0\n0,1,2,\n1,0,1,0.25\n");
    auto ds = load_csv(p4);
    CHECK(ds.corrupted(0));
    CHECK(std::isnan(ds.x(0)[0]));
    CHECK(ds.y(0) == 2);
    CHECK(ds.cat_size() == 3);

    // Duplicate index.
    auto p5 = write_tmp("bd_bad5.csv", "idx,corrupted,y,x0\n0,0,0,0.5\n0,0,0,0.7\n");
    CHECK_THROWS_WITH_AS(load_csv(p5), doctest::Contains("duplicate"), Error);

    // Non-numeric coordinate.
    auto p6 = write_tmp("bd_bad6.csv", "idx,corrupted,y,x0\n0,0,0,zzz\n");
    CHECK_THROWS_AS(load_csv(p6), Error);

    for (auto* p : {&p1, &p2, &p3, &p4, &p5, &p6}) std::filesystem::remove(*p);
}

TEST_CASE("summary basics") {
    auto cfg = basic(50, 1, 1, 3);
    cfg.p0 = 0.0;
    cfg.p0_means = P0Means::prob_corrupted;
    auto s = summary(generate(cfg));
    CHECK(s.p_up_hat == 1.0);
    CHECK(s.p_low_hat == 1.0);
    CHECK(s.frac_corrupted == 0.0);

    CHECK_THROWS_AS(generate(basic(0, 1, 1, 0)), Error);
}

TEST_CASE("summary on large uniform categories") {
    auto cfg = basic(100000, 1, 10, 909);
    cfg.p0 = 0.0;
    cfg.p0_means = P0Means::prob_corrupted;
    auto s = summary(generate(cfg));
    CHECK(s.p_up_hat >= 0.09);
    CHECK(s.p_up_hat <= 0.11);
    CHECK(s.p_low_hat >= 0.09);
}

TEST_CASE("categorical spec laws") {
    CategoricalSpec two;
    two.kind = CategoricalKind::two_level;
    two.cat_size = 5;
    two.top_mass = 0.6;
    auto p = two.probabilities();
    CHECK(p[0] == doctest::Approx(0.6));
    CHECK(p[3] == doctest::Approx(0.1));
    CHECK(two.p_up() == doctest::Approx(0.6));
    CHECK(two.p_low() == doctest::Approx(0.1));

    CategoricalSpec pow;
    pow.kind = CategoricalKind::power_law;
    pow.cat_size = 4;
    pow.exponent = 1.0;
    auto q = pow.probabilities();
    double sum = 0.0;
    for (double v : q) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(q[0] > q[3]);
}

TEST_CASE("config ini round trip") {
    const std::string text =
        "[model]\n"
        "n = 128\n"
        "d = 2\n"
        "r_n = 0.05\n"
        "p0 = 0.1\n"
        "p0_means = prob_corrupted\n"
        "[density]\n"
        "kind = two-level\n"
        "corner = 0.1,0.1\n"
        "side = 0.2\n"
        "hot_mass = 0.5\n"
        "[categorical]\n"
        "kind = uniform\n"
        "cat_size = 4\n"
        "[rng]\n"
        "seed = 42\n";
    auto cfg = config_from_ini(config::Ini::parse_string(text));
    CHECK(cfg.n == 128);
    CHECK(cfg.d == 2);
    CHECK(cfg.r_n == doctest::Approx(0.05));
    CHECK(cfg.p0_means == P0Means::prob_corrupted);
    CHECK(cfg.density.kind == DensityKind::two_level);
    CHECK(cfg.categorical.cat_size == 4);
    CHECK(cfg.seed == 42);

    auto cfg2 = config_from_ini(config::Ini::parse_string(config_to_ini(cfg)));
    CHECK(cfg2.n == cfg.n);
    CHECK(cfg2.r_n == cfg.r_n);
    CHECK(cfg2.density.side == cfg.density.side);

    CHECK_THROWS_WITH_AS(
        config_from_ini(config::Ini::parse_string("[model]\nbogus = 1\n")),
        doctest::Contains("unknown config key"), Error);

    auto tp = theory_params(cfg);
    CHECK(tp.p0 == doctest::Approx(0.1));  // prob_corrupted passes through
    cfg.p0_means = P0Means::prob_uncorrupted;
    CHECK(theory_params(cfg).p0 == doctest::Approx(0.9));
}
