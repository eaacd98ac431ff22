#include <doctest.h>

#include "lpg/rng.hpp"

#include <set>

using namespace lpg;

TEST_CASE("philox known answer") {
    // Random123 reference vectors for philox4x32_10.
    auto zero = philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(zero == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    auto ones = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    CHECK(ones == std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    auto pi = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    CHECK(pi == std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("counter rng streams are reproducible and distinct") {
    CounterRng a(42, Stream::latents), b(42, Stream::latents), c(42, Stream::adjacency), d(43, Stream::latents);
    bool differs_stream = false, differs_seed = false;
    for (int k = 0; k < 100; ++k) {
        const auto x = a();
        CHECK(x == b());
        differs_stream |= x != c();
        differs_seed |= x != d();
    }
    CHECK(differs_stream);
    CHECK(differs_seed);
}

TEST_CASE("uniform doubles stay in [0, 1) and look uniform") {
    CounterRng g(7, Stream::null_draws);
    double sum = 0;
    const int n = 200000;
    for (int k = 0; k < n; ++k) {
        const double u = g.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("replicate seeds") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(replicate_seed(20240101, i));
    CHECK(seen.size() == 1000);
    CHECK(replicate_seed(5, 0) == 5);
}
