#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace siqrng {

/// SplitMix64 step; used to expand seeds and to derive independent streams.
constexpr std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    auto z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/**
 * @brief xoshiro256++ engine satisfying std::uniform_random_bit_generator.
 *
 * Not cryptographic. It drives the photonic simulator and stands in for the
 * external uniform seed when no seed file is supplied.
 */
class Xoshiro256pp {
public:
    using result_type = std::uint64_t;

    constexpr explicit Xoshiro256pp(std::uint64_t seed = 1) {
        auto x = seed;
        for (auto& v : s_) {
            v = splitmix64(x);
        }
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() {
        const auto result = rotl(s_[0] + s_[3], 23) + s_[0];
        const auto t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0,1) with 53 random bits.
    constexpr double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> s_{};
};

/// Independent randomness consumers inside one run. Each derives its own
/// engine from the master seed so that changing one consumer never shifts
/// another's stream.
enum class RngStream : std::uint64_t {
    photonics = 1,
    basis_seed = 2,
    double_click_seed = 3,
    toeplitz_seed = 4,
};

/// Seed for (stream, block) under a master seed. Pure function of its inputs.
constexpr std::uint64_t derive_seed(std::uint64_t master, RngStream stream, std::uint64_t block = 0) {
    std::uint64_t x = master;
    std::uint64_t h = splitmix64(x);
    x = h ^ (static_cast<std::uint64_t>(stream) * 0xD1B54A32D192ED03ULL);
    h = splitmix64(x);
    x = h ^ (block * 0x8CB92BA72F3D8DD7ULL + 0x632BE59BD9B4E019ULL);
    return splitmix64(x);
}

}  // namespace siqrng
