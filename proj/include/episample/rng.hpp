#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace episample {

// All random draws in the project go through Rng so that runs are
// reproducible bit-for-bit across platforms. std::mt19937_64 output is
// fully specified by the standard; the distribution helpers below are
// hand-rolled because the std distribution objects are not portable.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform() < p;
    }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_int: empty range");
        if ((n & (n - 1)) == 0) return next_u64() & (n - 1);
        std::uint64_t mask = ~std::uint64_t{0};
        std::uint64_t v = n - 1;
        v |= v >> 1; v |= v >> 2; v |= v >> 4;
        v |= v >> 8; v |= v >> 16; v |= v >> 32;
        mask = v;
        std::uint64_t r;
        do {
            r = next_u64() & mask;
        } while (r >= n);
        return r;
    }

    /// Binomial(n, p) via geometric skips; expected cost O(n*p).
    long binomial(long n, double p) {
        if (n <= 0 || p <= 0.0) return 0;
        if (p >= 1.0) return n;
        const double log_q = std::log1p(-p);
        long count = 0;
        long trial = 0;
        while (true) {
            double u = 1.0 - uniform();  // (0, 1]
            trial += static_cast<long>(std::floor(std::log(u) / log_q)) + 1;
            if (trial > n) break;
            ++count;
        }
        return count;
    }

    /// Poisson(mean), Knuth's method; intended for small means.
    long poisson(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        long k = 0;
        double prod = 1.0;
        do {
            ++k;
            prod *= uniform();
        } while (prod > limit);
        return k - 1;
    }

    /// Standard normal via the polar method; no cached second value so the
    /// draw count per call stays predictable.
    double normal() {
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        return u * std::sqrt(-2.0 * std::log(s) / s);
    }

    /// Gamma(shape, 1), Marsaglia-Tsang squeeze; shapes below one go
    /// through the boost identity Gamma(a) = Gamma(a+1) * U^(1/a).
    double gamma(double shape) {
        if (shape <= 0.0) throw std::invalid_argument("gamma: shape must be positive");
        if (shape < 1.0) {
            const double u = 1.0 - uniform();  // keep away from pow(0, ...)
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        while (true) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = 1.0 - uniform();  // (0, 1]
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    /// Beta(a, b) from two gamma draws.
    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        if (x + y == 0.0) return 0.5;
        return x / (x + y);
    }

    /// Fisher-Yates shuffle (std::shuffle is implementation-defined).
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_int(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Draw an index from a normalized weight vector by CDF inversion.
    std::size_t categorical(const std::vector<double>& cumulative) {
        const double u = uniform();
        std::size_t lo = 0, hi = cumulative.size();
        while (lo + 1 < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (u < cumulative[mid - 1]) hi = mid; else lo = mid;
        }
        return lo;
    }

private:
    std::mt19937_64 engine_;
};

constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Derives named, statistically independent child seeds from one root seed.
// Used to give population synthesis, the epidemic, the sampler and the
// embedding trainer their own streams: swapping the sampling policy must
// not perturb the epidemic randomness.
class SeedTree {
public:
    explicit SeedTree(std::uint64_t root) : root_(root) {}

    std::uint64_t root() const { return root_; }

    std::uint64_t child(std::string_view name) const {
        return mix64(root_ ^ fnv1a(name));
    }

    std::uint64_t child(std::string_view name, std::uint64_t index) const {
        return mix64(mix64(root_ ^ fnv1a(name)) ^ index);
    }

    Rng stream(std::string_view name) const { return Rng(child(name)); }

    Rng stream(std::string_view name, std::uint64_t index) const {
        return Rng(child(name, index));
    }

    SeedTree subtree(std::string_view name) const {
        return SeedTree(child(name));
    }

    SeedTree subtree(std::string_view name, std::uint64_t index) const {
        return SeedTree(child(name, index));
    }

private:
    std::uint64_t root_;
};

}  // namespace episample
