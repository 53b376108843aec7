#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "siqrng/entropy_math.hpp"
#include "siqrng/estimation.hpp"
#include "siqrng/extractor.hpp"
#include "siqrng/photonic_sim.hpp"
#include "siqrng/squash_sample.hpp"

namespace siqrng {

inline constexpr std::uint64_t kDefaultMasterSeed = 0x51ce'5eed'2014'0001ULL;

/// Parameter varied by a sweep.
enum class SweepKey { loss_db, mean_photon_number };

struct SweepSpec {
    SweepKey key = SweepKey::loss_db;
    std::vector<double> values;
};

/**
 * @brief Everything one run depends on.
 *
 * Loaded from a single JSON document whose physical fields carry their unit
 * in the name. Unknown keys are rejected.
 */
struct RunConfig {
    ProtocolParams protocol;
    OpticalSetup setup;
    std::uint64_t master_seed = kDefaultMasterSeed;
    double repetition_rate_hz = 1e6;
    double dead_time_ns = 50.0;
    std::uint64_t extraction_block_bits = kDefaultExtractionBlock;
    unsigned threads = 1;
    std::optional<SweepSpec> sweep;

    void validate() const;
};

RunConfig config_from_json(const nlohmann::json& doc);
/// "0x"-prefixed or bare hexadecimal, at most 16 digits.
std::uint64_t parse_hex_seed(const std::string& text);
nlohmann::json to_json(const RunConfig& config);

/// Parse "KEY=v1,v2,..." as given on the command line.
SweepSpec parse_sweep(const std::string& text);
/// Copy of `config` with the sweep parameter set to `value`.
RunConfig apply_sweep_value(RunConfig config, SweepKey key, double value);

/// Input-seed bits drawn by each consumer in one session.
struct SeedLedger {
    std::uint64_t basis_bits = 0;
    std::uint64_t double_click_bits = 0;
    std::uint64_t toeplitz_bits = 0;

    std::uint64_t total() const { return basis_bits + double_click_bits + toeplitz_bits; }
};

nlohmann::json to_json(const SeedLedger& ledger);

/// Basis plan drawn from the basis-seed stream of the master seed.
BasisPlan plan_session_bases(const RunConfig& config);
ClickStream simulate_session(const RunConfig& config, const BasisPlan& plan);
/// Squash and tally with double-click bits from the master seed's stream.
SessionTally tally_clicks(const ClickStream& clicks, std::uint64_t master_seed);

struct SessionResult {
    BasisPlan basis;
    ClickStream clicks;
    SessionTally tally;
    EstimationResult estimation;
    std::optional<ExtractionOutput> extraction;  ///< empty when aborted
    SeedLedger ledger;
    bool aborted = false;
    std::string abort_reason;
};

/**
 * @brief Simulate, squash, estimate and extract one session.
 *
 * Aborts (estimation failure or no extractable output) are reported in the
 * result rather than thrown. The Toeplitz seed is read from `toeplitz_seed`
 * when given, otherwise drawn from the master seed's Toeplitz stream.
 */
SessionResult run_pipeline(const RunConfig& config, const std::optional<BitBlock>& toeplitz_seed = std::nullopt);

struct CurvePoint {
    double loss_db = 0.0;
    double mean_photon_number = 0.0;
    std::uint64_t n = 0;
    std::uint64_t n_x = 0;
    std::uint64_t n_z = 0;
    double e_bx = 0.0;
    double theta = 0.0;
    double e_pz_bound = 0.0;
    bool abort = false;
    std::uint64_t K = 0;            ///< 0 when aborted
    double rate_bits_per_s = 0.0;   ///< K per session duration, capped by the dead time
    double eps_t = 0.0;
};

/// Simulate and estimate one configuration; K comes from the extraction plan.
CurvePoint evaluate_point(const RunConfig& config);
/// One point per sweep value, all on the same master seed.
std::vector<CurvePoint> run_sweep(const RunConfig& config);

/// Header line and one row per point.
std::string curve_csv(const std::vector<CurvePoint>& points);

}  // namespace siqrng
