#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace fedcmfs {

// Deterministic RNG. std::mt19937_64 output is pinned by the standard, but the
// std distributions are not, so the draw algorithms live here: results must be
// byte-identical across platforms and standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // Unbiased integer in [0, n) via rejection sampling.
    uint64_t below(uint64_t n) {
        if (n == 0) return 0;
        const uint64_t rem = std::numeric_limits<uint64_t>::max() % n;
        const uint64_t limit = std::numeric_limits<uint64_t>::max() - rem;
        uint64_t x;
        do {
            x = eng_();
        } while (x > limit);
        return x % n;
    }

    // Integer in [lo, hi] inclusive.
    int64_t range(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo) + 1));
    }

    // Uniform in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller (polar form avoided: branch count must
    // not depend on rejected draws differing across platforms; trig form is
    // draw-count deterministic).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = unit();
        double u2 = unit();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Sample k distinct values from [0, n) via partial Fisher-Yates.
    std::vector<int64_t> sample_without_replacement(int64_t n, int64_t k) {
        std::vector<int64_t> pool(static_cast<size_t>(n));
        for (int64_t i = 0; i < n; ++i) pool[static_cast<size_t>(i)] = i;
        for (int64_t i = 0; i < k; ++i) {
            const int64_t j = i + static_cast<int64_t>(below(static_cast<uint64_t>(n - i)));
            std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
        }
        pool.resize(static_cast<size_t>(k));
        return pool;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace fedcmfs
