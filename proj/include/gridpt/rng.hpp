#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace gridpt {

// splitmix64 step. Small, fast, and identical on every platform, which is all
// we need for reproducible experiments.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Derives the seed for sub-stream `index` (trial, sweep cell, noise stream)
// from a master seed. Mixing the index through splitmix64 keeps neighbouring
// indices decorrelated.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master ^ ((index + 1) * 0xA0761D6478BD642Full);
    return splitmix64(s);
}

// Deterministic RNG. Avoids std::normal_distribution and friends on purpose:
// their output is implementation-defined, and panels regenerated elsewhere
// must be byte-identical.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1)
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // uniform integer in [0, size); size must be positive
    std::uint64_t uniform_index(std::uint64_t size) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * size) >> 64);
    }

    // standard normal via Box-Muller, one value cached between calls
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform01(); // (0, 1], keeps log finite
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double t = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace gridpt
