#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "siqrng/rng.hpp"

namespace siqrng {

enum class Basis : std::uint8_t { Z = 0, X = 1 };

/// Joint outcome of the two threshold detectors for one gate.
enum class ClickPattern : std::uint8_t { none = 0, d0 = 1, d1 = 2, both = 3 };

enum class SourceMode : std::uint8_t {
    honest_plus,          ///< coherent pulses prepared in |+>
    adversarial_fixed_z,  ///< coherent pulses fixed to |H>, i.e. a Z eigenstate
};

struct SourceConfig {
    double mean_photon_number = 1.0;
    double misalignment = 0.02;  ///< fraction of |+> intensity leaking into |->
    SourceMode mode = SourceMode::honest_plus;

    void validate() const;
};

struct ChannelConfig {
    double loss_db = 0.0;

    double transmittance() const;
    void validate() const;
};

/// Both detectors share one efficiency and one per-gate dark-count probability.
struct DetectorConfig {
    double efficiency = 0.45;
    double dark_count_per_gate = 0.002;

    void validate() const;
};

struct OpticalSetup {
    SourceConfig source;
    ChannelConfig channel;
    DetectorConfig detector;

    void validate() const;
};

struct ClickEvent {
    std::uint64_t pulse_index = 0;
    Basis basis = Basis::Z;
    ClickPattern pattern = ClickPattern::none;

    friend bool operator==(const ClickEvent&, const ClickEvent&) = default;
};

/// One byte per pulse: bit 0 is the basis (1 = X), bits 1-2 the click pattern.
constexpr std::uint8_t encode_click(Basis basis, ClickPattern pattern) {
    return static_cast<std::uint8_t>(static_cast<std::uint8_t>(basis) |
                                     (static_cast<std::uint8_t>(pattern) << 1));
}
constexpr Basis decode_basis(std::uint8_t code) { return static_cast<Basis>(code & 1U); }
constexpr ClickPattern decode_pattern(std::uint8_t code) {
    return static_cast<ClickPattern>((code >> 1) & 3U);
}

/// Ordered per-pulse click records, stored in the one-byte wire encoding.
class ClickStream {
public:
    ClickStream() = default;
    explicit ClickStream(std::vector<std::uint8_t> codes);

    std::size_t size() const { return codes_.size(); }
    ClickEvent operator[](std::size_t i) const {
        return {i, decode_basis(codes_[i]), decode_pattern(codes_[i])};
    }
    std::span<const std::uint8_t> codes() const { return codes_; }

    friend bool operator==(const ClickStream&, const ClickStream&) = default;

private:
    std::vector<std::uint8_t> codes_;
};

/// Poisson-distributed photon count with mean `mu` (0 when mu == 0).
std::uint64_t sample_photon_number(double mu, Xoshiro256pp& rng);

/// Per-detector mean photon numbers arriving at D0 and D1 before loss.
struct ModeIntensities {
    double d0 = 0.0;
    double d1 = 0.0;
};
ModeIntensities mode_intensities(const SourceConfig& source, Basis basis);

/**
 * @brief Simulate one gate.
 *
 * Photons reaching detector i are Poisson with mean eta * t * mu_i (coherent
 * light split by the PBS, thinned by loss and efficiency). A detector clicks
 * when at least one photon is detected or an independent dark count fires, so
 * P(click_i) = 1 - (1 - p_d) exp(-eta mu_i t).
 */
ClickEvent detect_pulse(const OpticalSetup& setup, Basis basis, Xoshiro256pp& rng,
                        std::uint64_t pulse_index = 0);

/// Pulses per independently seeded simulation block.
inline constexpr std::uint64_t kSimulationBlock = 1ULL << 16;

/**
 * @brief Simulate a whole session of `total_pulses` gates.
 *
 * `x_positions` must be sorted, unique and below total_pulses; those pulses
 * are measured in X, all others in Z. Block b draws from an engine seeded with
 * derive_seed(master_seed, photonics, b), so the stream is identical for any
 * `threads`.
 */
ClickStream run_session(std::uint64_t total_pulses, const OpticalSetup& setup,
                        std::span<const std::uint64_t> x_positions, std::uint64_t master_seed,
                        unsigned threads = 1);

}  // namespace siqrng
