#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace lpg {

/// Philox4x32-10 block function (Salmon et al., Random123). Stateless: the
/// output depends only on (counter, key), so any draw can be recomputed
/// independently of evaluation order or thread scheduling.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Maps two 32-bit words to a double in [0, 1) with 53 random bits.
inline double unit_double(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Independent sub-streams derived from one seed.
enum class Stream : std::uint32_t {
    latents = 1,
    placement = 2,
    adjacency = 3,
    lanczos = 4,
    null_draws = 5,
    nystrom = 6,
};

/// Per-replicate seed: base ⊕ index, so replicate r is reproducible alone.
constexpr std::uint64_t replicate_seed(std::uint64_t base, std::uint64_t index) noexcept {
    return base ^ index;
}

/// Sequential UniformRandomBitGenerator over a Philox counter stream.
/// Usable with <random> distributions.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, Stream stream) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept;

    /// Uniform double in [0, 1).
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint32_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
};

/// Key words for a 64-bit seed.
constexpr std::array<std::uint32_t, 2> philox_key(std::uint64_t seed) noexcept {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

}  // namespace lpg
