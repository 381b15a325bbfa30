#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace fatml {

/// Deterministic counter-based generator (splitmix64). Every consumer of
/// randomness derives its own stream from (seed, tag) so results never depend
/// on evaluation order or thread scheduling.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    /// Derive an independent child stream. The tag is hashed (FNV-1a) and
    /// mixed into the current seed, so streams for distinct tags decorrelate.
    Rng stream(std::string_view tag) const {
        uint64_t h = 1469598103934665603ull;
        for (char c : tag) {
            h ^= static_cast<uint8_t>(c);
            h *= 1099511628211ull;
        }
        return Rng(mix(state_ ^ h));
    }

    Rng stream(uint64_t index) const {
        return Rng(mix(state_ ^ mix(index + 0x9e3779b97f4a7c15ull)));
    }

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    /// Unbiased integer in [0, n) via rejection sampling.
    uint64_t below(uint64_t n) {
        if (n == 0) return 0;
        uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    int64_t uniform_int(int64_t lo, int64_t hi) {  // inclusive bounds
        return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
    }

    /// Standard normal via Box-Muller (one draw per call, cached pair).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) {
        return mean + stddev * normal();
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static uint64_t mix(uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }

    uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace fatml
