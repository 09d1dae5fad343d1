#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace fedsnn {

// Self-contained splitmix64 stream. std::mt19937 + std distributions are not
// used anywhere: distribution algorithms are implementation-defined and the
// simulator guarantees byte-identical reruns for a given seed.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), unbiased via rejection.
    uint32_t next_below(uint32_t n) {
        const uint64_t span = 0x100000000ull;
        const uint64_t limit = span - span % n;
        for (;;) {
            uint64_t x = next_u64() >> 32;
            if (x < limit) return static_cast<uint32_t>(x % n);
        }
    }

    bool next_bool() { return (next_u64() >> 63) != 0; }

    // Standard normal draw, Box-Muller (two uniforms per draw, no cached spare).
    double next_gaussian() {
        double u1 = 1.0 - next_double();  // (0, 1]
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double next_gaussian(double mean, double stddev) { return mean + stddev * next_gaussian(); }

    // Marsaglia-Tsang gamma draw; shape > 0, unit scale.
    double next_gamma(double shape) {
        if (shape < 1.0) {
            double u = next_double();
            while (u <= 0.0) u = next_double();
            return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = next_gaussian();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = next_double();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // Symmetric Dirichlet(concentration) over k bins.
    std::vector<double> next_dirichlet(double concentration, int k) {
        std::vector<double> p(static_cast<size_t>(k));
        double sum = 0.0;
        for (auto& v : p) {
            v = next_gamma(concentration);
            sum += v;
        }
        if (sum <= 0.0) {  // pathological underflow at tiny concentration
            for (auto& v : p) v = 1.0 / k;
            return p;
        }
        for (auto& v : p) v /= sum;
        return p;
    }

    // Fisher-Yates, descending index order.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = next_below(static_cast<uint32_t>(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
};

namespace detail {
inline uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
}  // namespace detail

// Deterministic seed derivation; independent streams for (purpose, indices).
inline uint64_t derive_seed(uint64_t master, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t h = detail::mix64(master + 0x9E3779B97F4A7C15ull);
    h = detail::mix64(h ^ (a + 0xD1B54A32D192ED03ull));
    h = detail::mix64(h ^ (b + 0x8CB92BA72F3D8DD7ull));
    h = detail::mix64(h ^ (c + 0xEB44ACCAB455D165ull));
    return h;
}

// Stream purposes hung off an experiment master seed.
enum class SeedPurpose : uint64_t {
    ModelInit = 1,
    ClientEncode = 2,
    EvalEncode = 3,
    ClientTrain = 4,
    Selection = 5,
    Partition = 6,
    Noise = 7,
    SynthTrain = 8,
    SynthTest = 9,
    SweepRun = 10,
};

inline uint64_t derive_seed(uint64_t master, SeedPurpose p, uint64_t b = 0, uint64_t c = 0) {
    return derive_seed(master, static_cast<uint64_t>(p), b, c);
}

}  // namespace fedsnn
