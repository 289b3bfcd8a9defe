#ifndef DOCBIN_CORE_RANDOM_HPP
#define DOCBIN_CORE_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace docbin {

/// Seeded generator with portable draws. The standard distributions are
/// implementation-defined, so uniform and normal samples are derived here
/// directly from the 64-bit engine output.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi].
    int uniform_int(int lo, int hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(engine_() % span);
    }

    /// Standard normal via Box-Muller.
    double normal() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    template <class It>
    void shuffle(It first, It last) {
        for (auto n = last - first; n > 1; --n) {
            const auto j = static_cast<decltype(n)>(engine_() % static_cast<std::uint64_t>(n));
            std::swap(first[n - 1], first[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// 64-bit FNV-1a, used for payload checksums and for deriving sub-seeds.
inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
    return fnv1a(tag.data(), tag.size(), fnv1a(&seed, sizeof seed));
}

}  // namespace docbin

#endif  // DOCBIN_CORE_RANDOM_HPP
