#ifndef BD_COMMON_HPP
#define BD_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bd {

// Status codes shared by the C API and the CLI exit codes.
enum class Status : int {
    ok = 0,
    infeasible = 1,
    invalid_input = 2,
    budget_exhausted = 3,
};

class Error : public std::runtime_error {
public:
    Error(Status status, const std::string& message)
        : std::runtime_error(message), status_(status) {}

    Status status() const { return status_; }

private:
    Status status_;
};

[[noreturn]] inline void fail(Status status, const std::string& message) {
    throw Error(status, message);
}

inline void require(bool cond, Status status, const std::string& message) {
    if (!cond) fail(status, message);
}

namespace rng {

inline uint64_t mix64(uint64_t z) {
    z ^= z >> 33;
    z *= 0xff51afd7ed558ccdULL;
    z ^= z >> 33;
    z *= 0xc4ceb9fe1a85ec53ULL;
    z ^= z >> 33;
    return z;
}

// Counter-based 64-bit generator. Substreams for distinct keys are
// statistically independent, which keeps datasets reproducible when n
// or p0 change (per-point streams never shift).
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state_;
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [0, bound). Unbiased enough for bound << 2^64.
    uint64_t next_below(uint64_t bound) {
        return static_cast<uint64_t>(next_double() * static_cast<double>(bound));
    }

private:
    uint64_t state_;
};

inline uint64_t substream(uint64_t seed, uint64_t index) {
    return mix64(seed ^ mix64(index + 0x9e3779b97f4a7c15ULL));
}

inline uint64_t hash3(uint64_t a, uint64_t b, uint64_t c) {
    return mix64(mix64(a + 0x9e3779b97f4a7c15ULL) ^ mix64(b + 0xbf58476d1ce4e5b9ULL) ^
                 mix64(c + 0x94d049bb133111ebULL));
}

} // namespace rng
} // namespace bd

#endif
