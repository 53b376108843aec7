#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <gmpxx.h>

#include "siqrng/bitblock.hpp"
#include "siqrng/photonic_sim.hpp"
#include "siqrng/seed_stream.hpp"

namespace siqrng {

enum class OutcomeKind : std::uint8_t { vacuum, bit, double_click };

/// A click event after squashing to a qubit or vacuum.
struct SquashedOutcome {
    OutcomeKind kind = OutcomeKind::vacuum;
    std::uint8_t bit = 0;        ///< meaningful only for kind == bit
    bool seed_assigned = false;  ///< bit drawn from the seed for a Z double click

    friend bool operator==(const SquashedOutcome&, const SquashedOutcome&) = default;
};

struct SquashedEvent {
    Basis basis = Basis::Z;
    SquashedOutcome outcome;
};

/**
 * @brief Classify one click event.
 *
 * none -> vacuum; single click on D0/D1 -> bit 0/1; a Z double click gets a
 * uniformly random bit taken from `double_click_seed`; an X double click stays
 * a double_click (it is later counted as half an error, never given a bit).
 */
SquashedOutcome squash(const ClickEvent& event, SeedStream& double_click_seed);

/// Aggregated post-selection counts for one session.
struct SessionTally {
    std::uint64_t n = 0;    ///< non-vacuum events
    std::uint64_t n_x = 0;  ///< X-basis non-vacuum events
    std::uint64_t n_z = 0;  ///< Z-basis non-vacuum events
    std::uint64_t x_minus = 0;   ///< X single clicks reporting |->
    std::uint64_t x_double = 0;  ///< X double clicks
    std::uint64_t z_double = 0;  ///< Z double clicks (each given a seed bit)
    BitBlock z_bits;             ///< raw Z outcomes in pulse order
    std::uint64_t seed_bits_consumed = 0;

    /// n == n_x + n_z, x_minus + x_double <= n_x, |z_bits| == n_z.
    bool consistent() const;
};

SessionTally tally_session(std::span<const SquashedEvent> events);
/// Squash every event of the stream in pulse order, then tally.
SessionTally squash_and_tally(const ClickStream& clicks, SeedStream& double_click_seed);
/// Associative merge of tallies of consecutive pulse ranges (a before b).
SessionTally merge_tallies(SessionTally a, const SessionTally& b);

/// Exact binomial coefficient C(n, k); zero when k > n.
mpz_class binomial(std::uint64_t n, std::uint64_t k);

/**
 * @brief The index-th k-subset of {0..N-1} in lexicographic order.
 *
 * Uses the combinatorial number system with exact GMP binomials. For large N
 * a floating-point estimate picks the jump target; every decision is then
 * confirmed by exact integer comparison, so the map is an exact bijection.
 * Throws std::out_of_range unless 0 <= index < C(N,k).
 */
std::vector<std::uint64_t> unrank_combination(const mpz_class& index, std::uint64_t N, std::uint64_t k);

/// ceil(log2 C(N, N_x)); 0 when there is a single possibility.
std::uint64_t seed_length_required(std::uint64_t N, std::uint64_t N_x);

struct BasisPlan {
    std::vector<std::uint64_t> x_positions;  ///< sorted
    std::uint64_t seed_bits_consumed = 0;
    std::uint64_t windows = 0;  ///< seed windows drawn, including rejected ones
};

/**
 * @brief Choose N_x of N pulse positions for X measurements, uniformly.
 *
 * Seed windows of seed_length_required(N, N_x) bits are read as big-endian
 * integers (first bit most significant). A window below C(N, N_x) is unranked;
 * otherwise it is discarded and the next window drawn. Every drawn bit counts
 * toward seed_bits_consumed.
 */
BasisPlan plan_basis_positions(std::uint64_t N, std::uint64_t N_x, SeedStream& seed);
BasisPlan plan_basis_positions(std::uint64_t N, std::uint64_t N_x, const BitBlock& seed);

/// Integer value of a bit window, first bit most significant.
mpz_class window_value(const BitBlock& window);

}  // namespace siqrng
