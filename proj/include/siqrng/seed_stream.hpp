#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "siqrng/bitblock.hpp"
#include "siqrng/rng.hpp"

namespace siqrng {

/// Thrown when a finite seed source runs out of bits.
class SeedExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * @brief Source of uniform input-seed bits with exact consumption accounting.
 *
 * Backed either by a finite bit block (e.g. a seed file) or by a generator
 * standing in for an external uniform seed. Bits are handed out in order and
 * every bit handed out is counted.
 */
class SeedStream {
public:
    explicit SeedStream(BitBlock bits) : bits_(std::move(bits)) {}

    static SeedStream from_generator(std::uint64_t seed) {
        SeedStream s;
        s.generator_.emplace(seed);
        return s;
    }

    bool next_bit();
    /// Next `count` bits as a block. Throws SeedExhausted without consuming
    /// anything when fewer than `count` bits remain.
    BitBlock take(std::size_t count);

    std::uint64_t consumed() const { return consumed_; }
    /// Bits left, or nullopt for an unbounded generator.
    std::optional<std::uint64_t> remaining() const;

private:
    SeedStream() = default;

    BitBlock bits_;
    std::optional<Xoshiro256pp> generator_;
    std::uint64_t buffer_ = 0;
    unsigned buffered_ = 0;
    std::uint64_t consumed_ = 0;
};

}  // namespace siqrng
