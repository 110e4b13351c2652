#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "prethermal/vec3.hpp"

namespace prethermal {

/// splitmix64 finalizer; also used to derive substream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Portable random stream: std::mt19937_64 (bit-exact across standard libraries) with
/// hand-written variate transforms, since std distributions are implementation-defined.
///
/// Stream splitting: stream(seed, i) seeds the engine with
/// splitmix64(splitmix64(seed) ^ splitmix64(i + 0x632BE59BD9B4E019)), so substreams depend only on
/// (master seed, index) and never on scheduling order.
class Rng {
public:
    static constexpr std::string_view generator_name = "mt19937_64/splitmix64-streams";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng stream(std::uint64_t master_seed, std::uint64_t index)
    {
        return Rng(splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL)));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n) by rejection (unbiased).
    std::uint64_t below(std::uint64_t n)
    {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return r % n;
    }

    /// Uniform point on the unit sphere (Archimedes: z uniform in [-1,1], azimuth uniform).
    Vec3 unit_vector()
    {
        const double z = 2.0 * uniform() - 1.0;
        const double phi = 2.0 * M_PI * uniform();
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        return {r * std::cos(phi), r * std::sin(phi), z};
    }

private:
    std::mt19937_64 engine_;
};

} // namespace prethermal
