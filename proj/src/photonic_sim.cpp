#include "siqrng/photonic_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

namespace siqrng {

void SourceConfig::validate() const {
    if (!(mean_photon_number >= 0.0) || !std::isfinite(mean_photon_number)) {
        throw std::invalid_argument("mean_photon_number must be a finite value >= 0");
    }
    if (!(misalignment >= 0.0 && misalignment <= 0.5)) {
        throw std::invalid_argument("misalignment must lie in [0, 1/2]");
    }
}

double ChannelConfig::transmittance() const { return std::pow(10.0, -loss_db / 10.0); }

void ChannelConfig::validate() const {
    if (!(loss_db >= 0.0) || !std::isfinite(loss_db)) {
        throw std::invalid_argument("loss_db must be a finite value >= 0");
    }
    if (!(transmittance() > 0.0)) {
        throw std::invalid_argument("loss_db too large: transmittance underflows to zero");
    }
}

void DetectorConfig::validate() const {
    if (!(efficiency > 0.0 && efficiency <= 1.0)) {
        throw std::invalid_argument("detector efficiency must lie in (0,1]");
    }
    if (!(dark_count_per_gate >= 0.0 && dark_count_per_gate < 1.0)) {
        throw std::invalid_argument("dark_count_per_gate must lie in [0,1)");
    }
}

void OpticalSetup::validate() const {
    source.validate();
    channel.validate();
    detector.validate();
}

ClickStream::ClickStream(std::vector<std::uint8_t> codes) : codes_(std::move(codes)) {
    for (const auto c : codes_) {
        if (c > 7) {
            throw std::invalid_argument("click record byte has reserved bits set");
        }
    }
}

std::uint64_t sample_photon_number(double mu, Xoshiro256pp& rng) {
    if (mu <= 0.0) {
        return 0;
    }
    std::poisson_distribution<std::uint64_t> dist(mu);
    return dist(rng);
}

ModeIntensities mode_intensities(const SourceConfig& source, Basis basis) {
    const double mu = source.mean_photon_number;
    if (source.mode == SourceMode::honest_plus) {
        if (basis == Basis::X) {
            return {mu * (1.0 - source.misalignment), mu * source.misalignment};
        }
        return {mu / 2.0, mu / 2.0};
    }
    // |H> is a Z eigenstate: deterministic in Z, unbiased in X.
    if (basis == Basis::Z) {
        return {mu, 0.0};
    }
    return {mu / 2.0, mu / 2.0};
}

ClickEvent detect_pulse(const OpticalSetup& setup, Basis basis, Xoshiro256pp& rng,
                        std::uint64_t pulse_index) {
    const auto modes = mode_intensities(setup.source, basis);
    const double survive = setup.detector.efficiency * setup.channel.transmittance();
    const double p_dark = setup.detector.dark_count_per_gate;

    const std::uint64_t photons0 = sample_photon_number(modes.d0 * survive, rng);
    const std::uint64_t photons1 = sample_photon_number(modes.d1 * survive, rng);
    const bool dark0 = rng.uniform01() < p_dark;
    const bool dark1 = rng.uniform01() < p_dark;

    const bool click0 = photons0 > 0 || dark0;
    const bool click1 = photons1 > 0 || dark1;
    const auto pattern = static_cast<ClickPattern>((click0 ? 1U : 0U) | (click1 ? 2U : 0U));
    return {pulse_index, basis, pattern};
}

namespace {

void simulate_block(std::uint64_t block, std::uint64_t total_pulses, const OpticalSetup& setup,
                    std::span<const std::uint64_t> x_positions, std::uint64_t master_seed,
                    std::span<std::uint8_t> out) {
    const std::uint64_t begin = block * kSimulationBlock;
    const std::uint64_t end = std::min(total_pulses, begin + kSimulationBlock);
    Xoshiro256pp rng(derive_seed(master_seed, RngStream::photonics, block));
    auto next_x = std::lower_bound(x_positions.begin(), x_positions.end(), begin);
    for (std::uint64_t i = begin; i < end; ++i) {
        Basis basis = Basis::Z;
        if (next_x != x_positions.end() && *next_x == i) {
            basis = Basis::X;
            ++next_x;
        }
        const auto ev = detect_pulse(setup, basis, rng, i);
        out[i] = encode_click(ev.basis, ev.pattern);
    }
}

}  // namespace

ClickStream run_session(std::uint64_t total_pulses, const OpticalSetup& setup,
                        std::span<const std::uint64_t> x_positions, std::uint64_t master_seed,
                        unsigned threads) {
    setup.validate();
    for (std::size_t i = 0; i < x_positions.size(); ++i) {
        if (x_positions[i] >= total_pulses || (i > 0 && x_positions[i] <= x_positions[i - 1])) {
            throw std::invalid_argument("basis plan must be sorted, unique and within [0, N)");
        }
    }
    std::vector<std::uint8_t> codes(total_pulses);
    const std::uint64_t blocks = (total_pulses + kSimulationBlock - 1) / kSimulationBlock;
    threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::uint64_t>(blocks, 1))));

    if (threads == 1) {
        for (std::uint64_t b = 0; b < blocks; ++b) {
            simulate_block(b, total_pulses, setup, x_positions, master_seed, codes);
        }
        return ClickStream(std::move(codes));
    }

    // Static interleaved assignment; each block writes a disjoint range.
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        workers.emplace_back([&, t] {
            for (std::uint64_t b = t; b < blocks; b += threads) {
                simulate_block(b, total_pulses, setup, x_positions, master_seed, codes);
            }
        });
    }
    workers.clear();
    return ClickStream(std::move(codes));
}

}  // namespace siqrng
