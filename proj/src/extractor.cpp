#include "siqrng/extractor.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <string>
#include <thread>

namespace siqrng {

ExtractionPlan make_plan(std::uint64_t n_z, const EstimationResult& est, std::uint32_t t_e,
                         double efficiency_ratio, std::uint64_t block_size) {
    if (est.abort) {
        throw ExtractionError("parameter estimation aborted the protocol");
    }
    if (n_z == 0) {
        throw ExtractionError("no raw bits to extract from");
    }
    if (block_size == 0) {
        throw std::invalid_argument("block size must be positive");
    }
    ExtractionPlan plan;
    plan.n_z = n_z;
    plan.t_e = t_e;
    plan.e_pz_bound = est.e_pz_bound;
    plan.efficiency_ratio = efficiency_ratio;

    const std::uint64_t count = (n_z + block_size - 1) / block_size;
    const std::uint64_t base = n_z / count;
    const std::uint64_t extra = n_z % count;
    std::uint64_t offset = 0;
    for (std::uint64_t b = 0; b < count; ++b) {
        const std::uint64_t raw_bits = base + (b < extra ? 1 : 0);
        const auto length = efficiency_ratio == 1.0
                                ? final_length(raw_bits, est.e_pz_bound, t_e)
                                : mismatch_adjusted_length(efficiency_ratio, raw_bits, est.e_pz_bound, t_e);
        if (length.abort) {
            throw ExtractionError("non-positive output length (" + std::to_string(length.bits) +
                                  " bits) for a block of " + std::to_string(raw_bits) + " raw bits");
        }
        ExtractionBlock block{offset, raw_bits, static_cast<std::uint64_t>(length.bits)};
        plan.K += block.output_bits;
        plan.seed_length = std::max(plan.seed_length, block.seed_bits());
        plan.blocks.push_back(block);
        offset += raw_bits;
    }
    return plan;
}

namespace {

BitBlock hash_naive(const BitBlock& raw, const BitBlock& seed, std::uint64_t k) {
    const std::uint64_t n = raw.size();
    BitBlock out(k);
    for (std::uint64_t i = 0; i < k; ++i) {
        bool acc = false;
        for (std::uint64_t j = 0; j < n; ++j) {
            acc ^= seed.get(i + n - 1 - j) && raw.get(j);
        }
        out.set(i, acc);
    }
    return out;
}

// y[i] = parity(seed[i .. i+n) & reverse(raw)).
BitBlock hash_word_parallel(const BitBlock& raw, const BitBlock& seed, std::uint64_t k) {
    const std::uint64_t n = raw.size();
    const BitBlock rev = raw.reversed();
    const auto rw = rev.words();
    const std::size_t row_words = rw.size();
    const auto sw = seed.words();

    // shifted[s][w] holds seed bits starting at 64 w + s.
    const std::size_t padded = sw.size() + 1;
    std::vector<std::uint64_t> shifted(64 * padded, 0);
    for (unsigned s = 0; s < 64; ++s) {
        std::uint64_t* dst = shifted.data() + s * padded;
        for (std::size_t w = 0; w < sw.size(); ++w) {
            std::uint64_t v = sw[w] >> s;
            if (s != 0 && w + 1 < sw.size()) {
                v |= sw[w + 1] << (64 - s);
            }
            dst[w] = v;
        }
    }

    BitBlock out(k);
    auto ow = out.mutable_words();
    for (std::uint64_t i = 0; i < k; ++i) {
        const std::uint64_t* row = shifted.data() + (i & 63) * padded + (i >> 6);
        std::uint64_t acc = 0;
        for (std::size_t w = 0; w < row_words; ++w) {
            acc ^= row[w] & rw[w];
        }
        if (std::popcount(acc) & 1) {
            ow[i >> 6] |= std::uint64_t{1} << (i & 63);
        }
    }
    (void)n;
    return out;
}

// Arithmetic modulo 7 * 2^26 + 1 with primitive root 3. Coefficients of the
// convolution never exceed n < p, so their parity is read off exactly.
constexpr std::uint32_t kModulus = 469762049;
constexpr std::uint32_t kRoot = 3;
constexpr unsigned kMaxLog = 26;

constexpr std::uint32_t mul_mod(std::uint32_t a, std::uint32_t b) {
    return static_cast<std::uint32_t>(static_cast<std::uint64_t>(a) * b % kModulus);
}

constexpr std::uint32_t pow_mod(std::uint32_t base, std::uint64_t e) {
    std::uint32_t r = 1;
    while (e) {
        if (e & 1) {
            r = mul_mod(r, base);
        }
        base = mul_mod(base, base);
        e >>= 1;
    }
    return r;
}

void ntt(std::vector<std::uint32_t>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) {
            j ^= bit;
        }
        j ^= bit;
        if (i < j) {
            std::swap(a[i], a[j]);
        }
    }
    std::vector<std::uint32_t> roots;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        std::uint32_t w = pow_mod(kRoot, (kModulus - 1) / len);
        if (inverse) {
            w = pow_mod(w, kModulus - 2);
        }
        const std::size_t half = len / 2;
        roots.resize(half);
        roots[0] = 1;
        for (std::size_t i = 1; i < half; ++i) {
            roots[i] = mul_mod(roots[i - 1], w);
        }
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t j = 0; j < half; ++j) {
                const std::uint32_t u = a[i + j];
                const std::uint32_t v = mul_mod(a[i + j + half], roots[j]);
                const std::uint32_t sum = u + v;
                a[i + j] = sum >= kModulus ? sum - kModulus : sum;
                a[i + j + half] = u >= v ? u - v : u + kModulus - v;
            }
        }
    }
    if (inverse) {
        const std::uint32_t inv_n = pow_mod(static_cast<std::uint32_t>(n % kModulus), kModulus - 2);
        for (auto& x : a) {
            x = mul_mod(x, inv_n);
        }
    }
}

BitBlock hash_ntt(const BitBlock& raw, const BitBlock& seed, std::uint64_t k) {
    const std::uint64_t n = raw.size();
    const std::uint64_t len = seed.size();
    const std::size_t size = std::bit_ceil(static_cast<std::size_t>(len));
    if (std::countr_zero(size) > static_cast<int>(kMaxLog)) {
        throw std::length_error("Toeplitz seed too long for the transform path");
    }
    std::vector<std::uint32_t> a(size, 0);
    std::vector<std::uint32_t> b(size, 0);
    for (std::uint64_t i = 0; i < len; ++i) {
        a[i] = seed.get(i) ? 1 : 0;
    }
    for (std::uint64_t j = 0; j < n; ++j) {
        b[j] = raw.get(j) ? 1 : 0;
    }
    ntt(a, false);
    ntt(b, false);
    for (std::size_t i = 0; i < size; ++i) {
        a[i] = mul_mod(a[i], b[i]);
    }
    ntt(a, true);
    // Indices n-1 .. n+k-2 of the cyclic product never wrap because size >= len.
    BitBlock out(k);
    for (std::uint64_t i = 0; i < k; ++i) {
        if (a[i + n - 1] & 1U) {
            out.set(i, true);
        }
    }
    return out;
}

constexpr std::uint64_t kWordParallelWork = 1ULL << 30;  // k * n bit-operations

}  // namespace

BitBlock toeplitz_hash(const BitBlock& raw, const BitBlock& seed, std::uint64_t output_bits,
                       ToeplitzMethod method) {
    const std::uint64_t n = raw.size();
    if (n == 0 || output_bits == 0) {
        throw std::length_error("Toeplitz hashing needs non-empty input and output");
    }
    if (seed.size() != n + output_bits - 1) {
        throw std::length_error("Toeplitz seed must hold n + K - 1 = " + std::to_string(n + output_bits - 1) +
                                " bits, got " + std::to_string(seed.size()));
    }
    if (method == ToeplitzMethod::automatic) {
        const bool small = output_bits <= kWordParallelWork / n;
        const bool fits_ntt = std::bit_ceil(static_cast<std::size_t>(seed.size())) <= (std::size_t{1} << kMaxLog);
        method = (small || !fits_ntt) ? ToeplitzMethod::word_parallel : ToeplitzMethod::ntt;
    }
    switch (method) {
        case ToeplitzMethod::naive:
            return hash_naive(raw, seed, output_bits);
        case ToeplitzMethod::word_parallel:
            return hash_word_parallel(raw, seed, output_bits);
        case ToeplitzMethod::ntt:
            return hash_ntt(raw, seed, output_bits);
        case ToeplitzMethod::automatic:
            break;
    }
    throw std::invalid_argument("unknown Toeplitz method");
}

BitBlock toeplitz_extract(const BitBlock& raw, const BitBlock& seed, const ExtractionPlan& plan,
                          ToeplitzMethod method, unsigned threads) {
    if (raw.size() != plan.n_z) {
        throw std::length_error("raw block length " + std::to_string(raw.size()) + " does not match plan n_z " +
                                std::to_string(plan.n_z));
    }
    if (seed.size() != plan.seed_length) {
        throw std::length_error("seed length " + std::to_string(seed.size()) + " does not match plan " +
                                std::to_string(plan.seed_length));
    }
    std::vector<BitBlock> parts(plan.blocks.size());
    auto run = [&](std::size_t b) {
        const auto& blk = plan.blocks[b];
        parts[b] = toeplitz_hash(raw.slice(blk.offset, blk.raw_bits), seed.slice(0, blk.seed_bits()),
                                 blk.output_bits, method);
    };
    threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(parts.size())));
    if (threads == 1) {
        for (std::size_t b = 0; b < parts.size(); ++b) {
            run(b);
        }
    } else {
        std::vector<std::jthread> workers;
        for (unsigned t = 0; t < threads; ++t) {
            workers.emplace_back([&, t] {
                for (std::size_t b = t; b < parts.size(); b += threads) {
                    run(b);
                }
            });
        }
    }
    BitBlock out;
    for (const auto& p : parts) {
        out.append(p);
    }
    return out;
}

ExtractionOutput extract_session(const BitBlock& z_bits, const EstimationResult& est, std::uint32_t t_e,
                                 SeedStream& seed_source, const ExtractionOptions& options) {
    ExtractionOutput out;
    out.plan = make_plan(z_bits.size(), est, t_e, options.efficiency_ratio, options.block_size);
    const std::uint64_t before = seed_source.consumed();
    const BitBlock seed = seed_source.take(out.plan.seed_length);
    out.toeplitz_seed_bits = seed_source.consumed() - before;
    out.bits = toeplitz_extract(z_bits, seed, out.plan, options.method, options.threads);
    out.security = composed_security(est.log2_eps_theta, t_e, out.plan.blocks.size());
    return out;
}

}  // namespace siqrng
