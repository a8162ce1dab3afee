#pragma once

// Seeded sampling that reproduces bit-for-bit across standard libraries.
//
// std::mt19937_64 is fully specified by the standard, but the distribution
// adaptors (normal_distribution, uniform_real_distribution, shuffle) are
// not. Everything that turns raw 64-bit words into samples lives here.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace rlcnet {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [0, n), rejection sampled (no modulo bias).
    std::uint64_t below(std::uint64_t n);

    /// Standard normal via the Box-Muller transform; both outputs are used.
    double normal();

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    template <typename T>
    void shuffle(std::span<T> items)
    {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace rlcnet
