#include "siqrng/bitblock.hpp"

#include <bit>
#include <stdexcept>

namespace siqrng {

BitBlock BitBlock::from_bits(std::span<const std::uint8_t> bits) {
    BitBlock out(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] > 1) {
            throw std::invalid_argument("bit values must be 0 or 1");
        }
        if (bits[i]) {
            out.words_[i >> 6] |= std::uint64_t{1} << (i & 63);
        }
    }
    return out;
}

BitBlock BitBlock::from_bytes(std::span<const std::uint8_t> bytes, std::size_t size) {
    if (bytes.size() < (size + 7) / 8) {
        throw std::length_error("not enough bytes for the requested bit count");
    }
    BitBlock out(size);
    const std::size_t used = (size + 7) / 8;
    for (std::size_t b = 0; b < used; ++b) {
        out.words_[b >> 3] |= static_cast<std::uint64_t>(bytes[b]) << (8 * (b & 7));
    }
    out.normalize();
    return out;
}

void BitBlock::push_back(bool value) {
    if ((size_ & 63) == 0) {
        words_.push_back(0);
    }
    if (value) {
        words_[size_ >> 6] |= std::uint64_t{1} << (size_ & 63);
    }
    ++size_;
}

void BitBlock::append(const BitBlock& other) {
    const std::size_t shift = size_ & 63;
    if (shift == 0) {
        words_.resize(size_ / 64);
        words_.insert(words_.end(), other.words_.begin(), other.words_.end());
        size_ += other.size_;
        return;
    }
    const std::size_t new_size = size_ + other.size_;
    words_.resize((new_size + 63) / 64, 0);
    std::size_t w = size_ >> 6;
    for (const auto word : other.words_) {
        words_[w] |= word << shift;
        if (w + 1 < words_.size()) {
            words_[w + 1] |= word >> (64 - shift);
        }
        ++w;
    }
    size_ = new_size;
    normalize();
}

void BitBlock::resize(std::size_t size) {
    words_.resize((size + 63) / 64, 0);
    size_ = size;
    normalize();
}

BitBlock BitBlock::slice(std::size_t offset, std::size_t length) const {
    if (offset > size_ || length > size_ - offset) {
        throw std::out_of_range("slice exceeds the block");
    }
    BitBlock out(length);
    const std::size_t shift = offset & 63;
    const std::size_t first = offset >> 6;
    for (std::size_t w = 0; w < out.words_.size(); ++w) {
        std::uint64_t lo = words_[first + w] >> shift;
        if (shift != 0 && first + w + 1 < words_.size()) {
            lo |= words_[first + w + 1] << (64 - shift);
        }
        out.words_[w] = lo;
    }
    out.normalize();
    return out;
}

BitBlock BitBlock::reversed() const {
    BitBlock out(size_);
    for (std::size_t i = 0; i < size_; ++i) {
        if (get(i)) {
            out.set(size_ - 1 - i, true);
        }
    }
    return out;
}

std::size_t BitBlock::popcount() const {
    std::size_t total = 0;
    for (const auto w : words_) {
        total += static_cast<std::size_t>(std::popcount(w));
    }
    return total;
}

void BitBlock::normalize() {
    const std::size_t tail = size_ & 63;
    if (tail != 0 && !words_.empty()) {
        words_.back() &= (std::uint64_t{1} << tail) - 1;
    }
}

std::vector<std::uint8_t> BitBlock::to_bytes() const {
    std::vector<std::uint8_t> out((size_ + 7) / 8);
    for (std::size_t b = 0; b < out.size(); ++b) {
        out[b] = static_cast<std::uint8_t>(words_[b >> 3] >> (8 * (b & 7)));
    }
    return out;
}

std::vector<std::uint8_t> BitBlock::to_bits() const {
    std::vector<std::uint8_t> out(size_);
    for (std::size_t i = 0; i < size_; ++i) {
        out[i] = get(i) ? 1 : 0;
    }
    return out;
}

BitBlock& BitBlock::operator^=(const BitBlock& other) {
    if (other.size_ != size_) {
        throw std::invalid_argument("xor of blocks with different lengths");
    }
    for (std::size_t w = 0; w < words_.size(); ++w) {
        words_[w] ^= other.words_[w];
    }
    return *this;
}

}  // namespace siqrng
