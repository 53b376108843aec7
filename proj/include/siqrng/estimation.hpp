#pragma once

#include <cstdint>
#include <optional>

#include "siqrng/entropy_math.hpp"
#include "siqrng/squash_sample.hpp"

namespace siqrng {

struct EstimationResult {
    std::uint64_t n = 0;
    std::uint64_t n_x = 0;
    double e_bx = 0.0;                ///< includes half of the X double clicks
    double theta = 0.0;
    double log2_eps_theta = 0.0;      ///< achieved sampling failure, log2
    double e_pz_bound = 0.0;          ///< e_bx + theta
    bool abort = false;               ///< e_pz_bound >= 1/2
};

/**
 * (x_minus + x_double / 2) / n_x, or 1/n_x when no error was seen.
 * Throws std::domain_error when n_x == 0.
 */
double observed_x_error(const SessionTally& tally);

/// Bracket width of the theta bisection.
inline constexpr double kThetaTolerance = 1e-12;

/**
 * @brief Smallest theta with eps_theta_bound(n, q_x, e_bx, theta) <= 2^-eps_exponent.
 *
 * Bisection over (0, 1/2 - e_bx] on the log2 bound, which is strictly
 * decreasing there. The returned value is the upper end of a final bracket of
 * width <= kThetaTolerance, so it always satisfies the target. nullopt when
 * even theta = 1/2 - e_bx misses the target.
 */
std::optional<double> solve_theta(std::uint64_t n, double q_x, double e_bx, double eps_exponent);

/**
 * Number of effective X measurements needed for a target exponent:
 * ceil(exponent / [H(e+theta) - H(e) - H'(e+theta) theta]). Independent of n.
 */
std::uint64_t plan_nx(double e_bx_expected, double theta_target, double security_exponent);

/// Parameter estimation for a finished session. Abort is a flag, not an error.
EstimationResult estimate(const SessionTally& tally, const ProtocolParams& params);

}  // namespace siqrng
