#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace siqrng {

/**
 * @brief Packed bit sequence, least-significant bit first within each word.
 *
 * Bit i lives in word i / 64 at position i % 64. Pad bits above size() in the
 * last word are always zero; every mutator preserves that.
 */
class BitBlock {
public:
    BitBlock() = default;
    explicit BitBlock(std::size_t size) : words_((size + 63) / 64, 0), size_(size) {}

    static BitBlock from_bits(std::span<const std::uint8_t> bits);
    /// Unpack `size` bits from bytes, LSB first within each byte.
    static BitBlock from_bytes(std::span<const std::uint8_t> bytes, std::size_t size);

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }
    void set(std::size_t i, bool value) {
        const std::uint64_t mask = std::uint64_t{1} << (i & 63);
        if (value) {
            words_[i >> 6] |= mask;
        } else {
            words_[i >> 6] &= ~mask;
        }
    }
    void push_back(bool value);
    void append(const BitBlock& other);
    void resize(std::size_t size);

    /// Copy of bits [offset, offset + length).
    BitBlock slice(std::size_t offset, std::size_t length) const;
    /// Bits in reverse order.
    BitBlock reversed() const;

    std::size_t popcount() const;

    std::span<const std::uint64_t> words() const { return words_; }
    std::span<std::uint64_t> mutable_words() { return words_; }
    /// Clears pad bits; call after writing through mutable_words().
    void normalize();

    /// ceil(size / 8) bytes, LSB first within each byte.
    std::vector<std::uint8_t> to_bytes() const;
    std::vector<std::uint8_t> to_bits() const;

    friend bool operator==(const BitBlock& a, const BitBlock& b) {
        return a.size_ == b.size_ && a.words_ == b.words_;
    }

    BitBlock& operator^=(const BitBlock& other);

private:
    std::vector<std::uint64_t> words_;
    std::size_t size_ = 0;
};

}  // namespace siqrng
