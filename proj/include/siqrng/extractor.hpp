#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "siqrng/bitblock.hpp"
#include "siqrng/entropy_math.hpp"
#include "siqrng/estimation.hpp"
#include "siqrng/seed_stream.hpp"

namespace siqrng {

/// The protocol yields no output (aborted estimate or non-positive length).
class ExtractionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultExtractionBlock = 1ULL << 20;

struct ExtractionBlock {
    std::uint64_t offset = 0;       ///< first raw bit of the block
    std::uint64_t raw_bits = 0;
    std::uint64_t output_bits = 0;

    std::uint64_t seed_bits() const { return raw_bits + output_bits - 1; }
};

/**
 * @brief Output lengths and seed requirement of one extraction.
 *
 * The raw string is cut into nearly equal blocks of at most `block_size` bits;
 * each block pays its own t_e. All blocks share one Toeplitz seed (each uses a
 * prefix of it), so seed_length is the largest per-block requirement. With a
 * single block, K = n_z (1 - H(e_pz)) - t_e and seed_length = n_z + K - 1.
 */
struct ExtractionPlan {
    std::uint64_t n_z = 0;
    std::uint64_t K = 0;
    std::uint32_t t_e = 0;
    std::uint64_t seed_length = 0;
    double e_pz_bound = 0.0;
    double efficiency_ratio = 1.0;
    std::vector<ExtractionBlock> blocks;
};

ExtractionPlan make_plan(std::uint64_t n_z, const EstimationResult& est, std::uint32_t t_e,
                         double efficiency_ratio = 1.0, std::uint64_t block_size = kDefaultExtractionBlock);

enum class ToeplitzMethod {
    naive,          ///< bit-by-bit GF(2) matrix-vector product
    word_parallel,  ///< 64-bit AND/popcount over pre-shifted seed rows
    ntt,            ///< exact number-theoretic convolution, parity of each coefficient
    automatic,
};

/**
 * @brief y = T x over GF(2), T[i][j] = seed[i - j + n - 1].
 *
 * raw has n bits, seed has n + output_bits - 1 bits, y has output_bits bits.
 * Every method returns the identical block.
 */
BitBlock toeplitz_hash(const BitBlock& raw, const BitBlock& seed, std::uint64_t output_bits,
                       ToeplitzMethod method = ToeplitzMethod::automatic);

/// Apply a plan: raw must hold plan.n_z bits and seed plan.seed_length bits.
BitBlock toeplitz_extract(const BitBlock& raw, const BitBlock& seed, const ExtractionPlan& plan,
                          ToeplitzMethod method = ToeplitzMethod::automatic, unsigned threads = 1);

struct ExtractionOptions {
    double efficiency_ratio = 1.0;
    std::uint64_t block_size = kDefaultExtractionBlock;
    ToeplitzMethod method = ToeplitzMethod::automatic;
    unsigned threads = 1;
};

struct ExtractionOutput {
    BitBlock bits;
    SecurityReport security;
    ExtractionPlan plan;
    std::uint64_t toeplitz_seed_bits = 0;
};

/// Plan, draw the Toeplitz seed from `seed_source`, extract and compose the
/// security parameter.
ExtractionOutput extract_session(const BitBlock& z_bits, const EstimationResult& est, std::uint32_t t_e,
                                 SeedStream& seed_source, const ExtractionOptions& options = {});

}  // namespace siqrng
