#include "core/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace bd::dataset {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void DensitySpec::validate(uint32_t d) const {
    if (kind == DensityKind::uniform_unit_cube) return;
    require(corner.size() == d, Status::invalid_input,
            "density corner must have d entries");
    require(side > 0.0 && side < 1.0, Status::invalid_input,
            "density side must be in (0,1)");
    require(hot_mass > 0.0 && hot_mass <= 1.0, Status::invalid_input,
            "density hot_mass must be in (0,1]");
    for (double c : corner) {
        require(c >= 0.0 && c <= 1.0 - side, Status::invalid_input,
                "density corner must keep S0 inside the unit cube");
    }
}

double DensitySpec::eps_low(uint32_t d) const {
    if (kind == DensityKind::uniform_unit_cube) return 1.0;
    return hot_mass / std::pow(side, static_cast<double>(d));
}

double DensitySpec::eps_up(uint32_t d) const {
    if (kind == DensityKind::uniform_unit_cube) return 1.0;
    const double inside = hot_mass / std::pow(side, static_cast<double>(d));
    if (hot_mass >= 1.0) return inside;
    const double outside =
        (1.0 - hot_mass) / (1.0 - std::pow(side, static_cast<double>(d)));
    return std::max(inside, outside);
}

void CategoricalSpec::validate() const {
    require(cat_size >= 1, Status::invalid_input, "cat_size must be >= 1");
    switch (kind) {
        case CategoricalKind::uniform:
            break;
        case CategoricalKind::two_level:
            require(cat_size >= 2, Status::invalid_input,
                    "two-level categorical needs cat_size >= 2");
            require(top_mass >= 1.0 / cat_size && top_mass < 1.0, Status::invalid_input,
                    "two-level top_mass must be in [1/cat_size, 1)");
            break;
        case CategoricalKind::power_law:
            require(exponent >= 0.0, Status::invalid_input,
                    "power-law exponent must be >= 0");
            break;
    }
}

std::vector<double> CategoricalSpec::probabilities() const {
    validate();
    std::vector<double> p(cat_size);
    switch (kind) {
        case CategoricalKind::uniform:
            std::fill(p.begin(), p.end(), 1.0 / cat_size);
            break;
        case CategoricalKind::two_level: {
            p[0] = top_mass;
            const double rest = (1.0 - top_mass) / (cat_size - 1);
            std::fill(p.begin() + 1, p.end(), rest);
            break;
        }
        case CategoricalKind::power_law: {
            double sum = 0.0;
            for (uint32_t y = 0; y < cat_size; ++y) {
                p[y] = std::pow(static_cast<double>(y + 1), -exponent);
                sum += p[y];
            }
            for (auto& v : p) v /= sum;
            break;
        }
    }
    return p;
}

double CategoricalSpec::p_up() const {
    const auto p = probabilities();
    return *std::max_element(p.begin(), p.end());
}

double CategoricalSpec::p_low() const {
    const auto p = probabilities();
    return *std::min_element(p.begin(), p.end());
}

void GeneratorConfig::validate() const {
    require(n >= 1, Status::invalid_input, "n must be >= 1");
    require(d >= 1, Status::invalid_input, "d must be >= 1");
    require(r_n >= 0.0, Status::invalid_input, "r_n must be >= 0");
    require(p0 >= 0.0 && p0 <= 1.0, Status::invalid_input, "p0 must be in [0,1]");
    density.validate(d);
    categorical.validate();
}

Dataset::Dataset(GeneratorConfig cfg, std::vector<double> xs, std::vector<uint32_t> ys,
                 std::vector<uint8_t> corrupted)
    : cfg_(std::move(cfg)), xs_(std::move(xs)), ys_(std::move(ys)),
      corrupted_(std::move(corrupted)) {
    require(cfg_.n >= 1, Status::invalid_input, "dataset must contain at least one point");
    require(xs_.size() == static_cast<size_t>(cfg_.n) * cfg_.d &&
                ys_.size() == cfg_.n && corrupted_.size() == cfg_.n,
            Status::invalid_input, "dataset arrays inconsistent with n and d");
    cat_size_ = cfg_.categorical.cat_size;
    for (uint32_t y : ys_) {
        require(y < cat_size_, Status::invalid_input, "category id out of range");
    }
}

DataPoint Dataset::point(uint32_t i) const {
    require(i < size(), Status::invalid_input, "point index out of range");
    DataPoint p;
    p.index = i;
    auto xi = x(i);
    p.x.assign(xi.begin(), xi.end());
    p.y = ys_[i];
    p.corrupted = corrupted(i);
    return p;
}

bool Dataset::same_points(const Dataset& other) const {
    if (size() != other.size() || dim() != other.dim()) return false;
    for (uint32_t i = 0; i < size(); ++i) {
        if (corrupted(i) != other.corrupted(i) || y(i) != other.y(i)) return false;
        if (!corrupted(i)) {
            auto a = x(i), b = other.x(i);
            for (uint32_t j = 0; j < dim(); ++j) {
                if (a[j] != b[j]) return false;
            }
        }
    }
    return true;
}

Dataset generate(const GeneratorConfig& cfg) {
    cfg.validate();
    const uint32_t n = cfg.n, d = cfg.d;
    std::vector<double> xs(static_cast<size_t>(n) * d);
    std::vector<uint32_t> ys(n);
    std::vector<uint8_t> corr(n);

    auto probs = cfg.categorical.probabilities();
    std::vector<double> cum(probs.size());
    double acc = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) cum[i] = (acc += probs[i]);
    cum.back() = 1.0;

    const bool two_level = cfg.density.kind == DensityKind::two_level;

    for (uint32_t i = 0; i < n; ++i) {
        rng::SplitMix64 g(rng::substream(cfg.seed, i));
        double* x = xs.data() + static_cast<size_t>(i) * d;

        // Continuous part first; drawn even for points that end up corrupted
        // so the per-point stream does not depend on the corruption flag.
        if (!two_level) {
            for (uint32_t j = 0; j < d; ++j) x[j] = g.next_double();
        } else if (g.next_double() < cfg.density.hot_mass) {
            for (uint32_t j = 0; j < d; ++j) {
                x[j] = cfg.density.corner[j] + cfg.density.side * g.next_double();
            }
        } else {
            bool inside = true;
            while (inside) {
                inside = true;
                for (uint32_t j = 0; j < d; ++j) {
                    x[j] = g.next_double();
                    if (x[j] < cfg.density.corner[j] ||
                        x[j] >= cfg.density.corner[j] + cfg.density.side) {
                        inside = false;
                    }
                }
            }
        }

        const double uy = g.next_double();
        ys[i] = static_cast<uint32_t>(
            std::upper_bound(cum.begin(), cum.end(), uy) - cum.begin());
        if (ys[i] >= probs.size()) ys[i] = static_cast<uint32_t>(probs.size()) - 1;

        const double udelta = g.next_double();
        const bool corrupted = cfg.p0_means == P0Means::prob_corrupted
                                   ? udelta < cfg.p0
                                   : !(udelta < cfg.p0);
        corr[i] = corrupted ? 1 : 0;
        if (corrupted) {
            for (uint32_t j = 0; j < d; ++j) x[j] = kMissing;
        }
    }
    return Dataset(cfg, std::move(xs), std::move(ys), std::move(corr));
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), Status::invalid_input, "cannot open for writing: " + path);
    out << "idx,corrupted,y";
    for (uint32_t j = 0; j < ds.dim(); ++j) out << ",x" << j;
    out << "\n";
    for (uint32_t i = 0; i < ds.size(); ++i) {
        out << i << ',' << (ds.corrupted(i) ? 1 : 0) << ',' << ds.y(i);
        if (ds.corrupted(i)) {
            for (uint32_t j = 0; j < ds.dim(); ++j) out << ',';
        } else {
            auto x = ds.x(i);
            for (uint32_t j = 0; j < ds.dim(); ++j) out << ',' << format_double(x[j]);
        }
        out << "\n";
    }
    require(out.good(), Status::invalid_input, "write failed: " + path);
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), Status::invalid_input, "cannot open dataset file: " + path);

    std::string line;
    require(static_cast<bool>(std::getline(in, line)), Status::invalid_input,
            path + ": empty file");
    auto header = split_cells(line);
    require(header.size() >= 4 && header[0] == "idx" && header[1] == "corrupted" &&
                header[2] == "y",
            Status::invalid_input, path + ": malformed header");
    const uint32_t d = static_cast<uint32_t>(header.size() - 3);
    for (uint32_t j = 0; j < d; ++j) {
        require(header[3 + j] == "x" + std::to_string(j), Status::invalid_input,
                path + ": malformed header");
    }

    std::vector<double> xs;
    std::vector<uint32_t> ys;
    std::vector<uint8_t> corr;
    std::vector<uint64_t> idxs;
    size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const std::string where = path + ": row " + std::to_string(row);
        auto cells = split_cells(line);
        require(cells.size() == static_cast<size_t>(3) + d, Status::invalid_input,
                where + ": expected " + std::to_string(3 + d) + " cells (d=" +
                    std::to_string(d) + "), got " + std::to_string(cells.size()));
        idxs.push_back(config::parse_uint(cells[0], where + ": idx"));
        require(cells[1] == "0" || cells[1] == "1", Status::invalid_input,
                where + ": corrupted flag must be 0 or 1");
        const bool corrupted = cells[1] == "1";
        uint64_t y;
        try {
            y = config::parse_uint(cells[2], where + ": category id");
        } catch (const Error&) {
            fail(Status::invalid_input, where + ": category id out of range");
        }
        require(y <= 0x7fffffffULL, Status::invalid_input,
                where + ": category id out of range");
        ys.push_back(static_cast<uint32_t>(y));
        corr.push_back(corrupted ? 1 : 0);
        for (uint32_t j = 0; j < d; ++j) {
            const std::string& cell = cells[3 + j];
            if (corrupted) {
                require(cell.empty(), Status::invalid_input,
                        where + ": corrupted row must leave x cells empty");
                xs.push_back(kMissing);
            } else {
                require(!cell.empty(), Status::invalid_input,
                        where + ": missing coordinate x" + std::to_string(j));
                xs.push_back(config::parse_double(cell, where + ": x" + std::to_string(j)));
            }
        }
    }
    require(!idxs.empty(), Status::invalid_input, path + ": no data rows");
    const uint32_t n = static_cast<uint32_t>(idxs.size());

    // Rows may appear in any order but must index 0..n-1 exactly once.
    std::vector<uint32_t> order(n);
    std::vector<uint8_t> seen(n, 0);
    for (uint32_t r = 0; r < n; ++r) {
        require(idxs[r] < n, Status::invalid_input,
                path + ": row " + std::to_string(r + 1) + ": idx out of range");
        require(!seen[idxs[r]], Status::invalid_input,
                path + ": row " + std::to_string(r + 1) + ": duplicate idx");
        seen[idxs[r]] = 1;
        order[idxs[r]] = r;
    }

    std::vector<double> xs2(static_cast<size_t>(n) * d);
    std::vector<uint32_t> ys2(n);
    std::vector<uint8_t> corr2(n);
    uint32_t max_y = 0;
    for (uint32_t i = 0; i < n; ++i) {
        const uint32_t r = order[i];
        ys2[i] = ys[r];
        corr2[i] = corr[r];
        max_y = std::max(max_y, ys[r]);
        for (uint32_t j = 0; j < d; ++j) {
            xs2[static_cast<size_t>(i) * d + j] = xs[static_cast<size_t>(r) * d + j];
        }
    }

    // Snapshot config: files carry points only, so only n, d and the
    // inferred category count are meaningful here.
    GeneratorConfig cfg;
    cfg.n = n;
    cfg.d = d;
    cfg.categorical.cat_size = max_y + 1;
    return Dataset(std::move(cfg), std::move(xs2), std::move(ys2), std::move(corr2));
}

Summary summary(const Dataset& ds) {
    Summary s;
    s.n = ds.size();
    s.d = ds.dim();
    s.histogram.assign(ds.cat_size(), 0);
    uint64_t corrupted = 0;
    for (uint32_t i = 0; i < ds.size(); ++i) {
        ++s.histogram[ds.y(i)];
        if (ds.corrupted(i)) ++corrupted;
    }
    s.frac_corrupted = static_cast<double>(corrupted) / ds.size();
    uint64_t hi = 0;
    uint64_t lo = std::numeric_limits<uint64_t>::max();
    for (uint64_t c : s.histogram) {
        hi = std::max(hi, c);
        if (c > 0) lo = std::min(lo, c);
    }
    s.p_up_hat = static_cast<double>(hi) / ds.size();
    s.p_low_hat = static_cast<double>(lo) / ds.size();
    return s;
}

std::string Summary::to_text() const {
    std::ostringstream out;
    out << "n: " << n << "\n";
    out << "d: " << d << "\n";
    out << "frac_corrupted: " << format_double(frac_corrupted) << "\n";
    out << "p_up_hat: " << format_double(p_up_hat) << "\n";
    out << "p_low_hat: " << format_double(p_low_hat) << "\n";
    out << "histogram:";
    for (uint64_t c : histogram) out << ' ' << c;
    out << "\n";
    return out.str();
}

GeneratorConfig config_from_ini(const config::Ini& ini) {
    ini.check_keys("model", {"n", "d", "r_n", "p0", "p0_means"});
    ini.check_keys("density", {"kind", "corner", "side", "hot_mass"});
    ini.check_keys("categorical", {"kind", "cat_size", "top_mass", "exponent"});
    ini.check_keys("rng", {"seed"});

    GeneratorConfig cfg;
    cfg.n = static_cast<uint32_t>(ini.get_uint("model", "n", 1));
    cfg.d = static_cast<uint32_t>(ini.get_uint("model", "d", 1));
    cfg.r_n = ini.get_double("model", "r_n", 0.0);
    cfg.p0 = ini.get_double("model", "p0", 1.0);
    const std::string means = ini.get("model", "p0_means", "prob_uncorrupted");
    if (means == "prob_uncorrupted") {
        cfg.p0_means = P0Means::prob_uncorrupted;
    } else if (means == "prob_corrupted") {
        cfg.p0_means = P0Means::prob_corrupted;
    } else {
        fail(Status::invalid_input, "p0_means must be prob_uncorrupted or prob_corrupted");
    }

    const std::string dk = ini.get("density", "kind", "uniform-unit-cube");
    if (dk == "uniform-unit-cube") {
        cfg.density.kind = DensityKind::uniform_unit_cube;
    } else if (dk == "two-level") {
        cfg.density.kind = DensityKind::two_level;
        cfg.density.corner = ini.get_doubles("density", "corner");
        cfg.density.side = ini.get_double("density", "side", 0.25);
        cfg.density.hot_mass = ini.get_double("density", "hot_mass", 0.5);
    } else {
        fail(Status::invalid_input, "density kind must be uniform-unit-cube or two-level");
    }

    const std::string ck = ini.get("categorical", "kind", "uniform");
    if (ck == "uniform") {
        cfg.categorical.kind = CategoricalKind::uniform;
    } else if (ck == "two-level") {
        cfg.categorical.kind = CategoricalKind::two_level;
        cfg.categorical.top_mass = ini.get_double("categorical", "top_mass", 0.5);
    } else if (ck == "power-law") {
        cfg.categorical.kind = CategoricalKind::power_law;
        cfg.categorical.exponent = ini.get_double("categorical", "exponent", 1.0);
    } else {
        fail(Status::invalid_input,
             "categorical kind must be uniform, two-level or power-law");
    }
    cfg.categorical.cat_size = static_cast<uint32_t>(ini.get_uint("categorical", "cat_size", 1));
    cfg.seed = ini.get_uint("rng", "seed", 0);
    cfg.validate();
    return cfg;
}

std::string config_to_ini(const GeneratorConfig& cfg) {
    std::ostringstream out;
    out << "[model]\n";
    out << "n = " << cfg.n << "\n";
    out << "d = " << cfg.d << "\n";
    out << "r_n = " << format_double(cfg.r_n) << "\n";
    out << "p0 = " << format_double(cfg.p0) << "\n";
    out << "p0_means = "
        << (cfg.p0_means == P0Means::prob_corrupted ? "prob_corrupted" : "prob_uncorrupted")
        << "\n";
    out << "[density]\n";
    if (cfg.density.kind == DensityKind::uniform_unit_cube) {
        out << "kind = uniform-unit-cube\n";
    } else {
        out << "kind = two-level\n";
        out << "corner = ";
        for (size_t j = 0; j < cfg.density.corner.size(); ++j) {
            out << (j ? "," : "") << format_double(cfg.density.corner[j]);
        }
        out << "\n";
        out << "side = " << format_double(cfg.density.side) << "\n";
        out << "hot_mass = " << format_double(cfg.density.hot_mass) << "\n";
    }
    out << "[categorical]\n";
    switch (cfg.categorical.kind) {
        case CategoricalKind::uniform:
            out << "kind = uniform\n";
            break;
        case CategoricalKind::two_level:
            out << "kind = two-level\n";
            out << "top_mass = " << format_double(cfg.categorical.top_mass) << "\n";
            break;
        case CategoricalKind::power_law:
            out << "kind = power-law\n";
            out << "exponent = " << format_double(cfg.categorical.exponent) << "\n";
            break;
    }
    out << "cat_size = " << cfg.categorical.cat_size << "\n";
    out << "[rng]\n";
    out << "seed = " << cfg.seed << "\n";
    return out.str();
}

theory::TheoryParams theory_params(const GeneratorConfig& cfg) {
    theory::TheoryParams p;
    p.n = cfg.n;
    p.d = cfg.d;
    p.r_n = cfg.r_n;
    p.p0 = cfg.corruption_probability();
    p.p_up = cfg.categorical.p_up();
    p.p_low = cfg.categorical.p_low();
    p.cat_size = cfg.categorical.cat_size;
    return p;
}

} // namespace bd::dataset
