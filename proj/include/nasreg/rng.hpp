#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace nasreg {

// xoshiro256++ seeded through splitmix64. Integer-only state transitions, so
// a given seed produces the same stream on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64();

    // Uniform in [0, 1), 53-bit resolution.
    double next_uniform();

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n);

    // Standard normal via Box-Muller; pairs are drawn from consecutive
    // uniforms and the spare is cached, so the sequence is seed-determined.
    double next_gaussian();

private:
    std::uint64_t state_[4];
    std::uint64_t seed_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Stable 64-bit sub-seed for a named stage of a seeded computation.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

std::vector<double> sample_standard_normal(Rng& rng, std::size_t n);

template <typename T>
void shuffle(std::span<T> values, Rng& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(values[i - 1], values[j]);
    }
}

}  // namespace nasreg
