#pragma once

#include <cstdint>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace adl {

// Finalizer from splitmix64.
inline uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives an independent sub-seed from a master seed, a stream tag and an
// optional per-item index. Every source of randomness in the library gets
// its seed through this, so whole runs replay from one seed.
inline uint64_t derive_seed(uint64_t master, uint64_t stream, uint64_t index = 0) {
    uint64_t z = mix64(master + 0x9e3779b97f4a7c15ULL * (stream + 1));
    z = mix64(z ^ (0xd1342543de82ef95ULL * (index + 1)));
    return z;
}

// mt19937_64 with hand-rolled distributions. The std distributions are
// implementation-defined, these are not, so streams are reproducible across
// standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform integer in [0, n). Rejection sampling, unbiased.
    uint64_t below(uint64_t n) {
        const uint64_t limit = std::numeric_limits<uint64_t>::max()
                               - std::numeric_limits<uint64_t>::max() % n;
        uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    // Uniform double in [0, 1).
    double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so the log is finite
        double u1 = double((gen_() >> 11) + 1) * 0x1.0p-53;
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = size_t(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices out of [0, n), in random order.
    std::vector<size_t> sample_without_replacement(size_t n, size_t k) {
        std::vector<size_t> idx(n);
        for (size_t i = 0; i < n; ++i) idx[i] = i;
        for (size_t i = 0; i < k && i + 1 < n; ++i) {
            size_t j = i + size_t(below(uint64_t(n - i)));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k < n ? k : n);
        return idx;
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace adl
