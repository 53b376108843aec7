#include "siqrng/seed_stream.hpp"

#include <string>

namespace siqrng {

bool SeedStream::next_bit() {
    if (generator_) {
        if (buffered_ == 0) {
            buffer_ = (*generator_)();
            buffered_ = 64;
        }
        const bool bit = buffer_ & 1U;
        buffer_ >>= 1;
        --buffered_;
        ++consumed_;
        return bit;
    }
    if (consumed_ >= bits_.size()) {
        throw SeedExhausted("seed stream exhausted after " + std::to_string(consumed_) + " bits");
    }
    return bits_.get(consumed_++);
}

BitBlock SeedStream::take(std::size_t count) {
    if (!generator_) {
        if (bits_.size() - consumed_ < count) {
            throw SeedExhausted("seed stream has " + std::to_string(bits_.size() - consumed_) +
                                " bits left, " + std::to_string(count) + " requested");
        }
        BitBlock out = bits_.slice(consumed_, count);
        consumed_ += count;
        return out;
    }
    BitBlock out(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (next_bit()) {
            out.set(i, true);
        }
    }
    return out;
}

std::optional<std::uint64_t> SeedStream::remaining() const {
    if (generator_) {
        return std::nullopt;
    }
    return bits_.size() - consumed_;
}

}  // namespace siqrng
