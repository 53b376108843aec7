#pragma once

#include <cstdint>

namespace siqrng {

/**
 * @brief Security and sampling knobs of one generation session.
 *
 * The failure probability of the phase-error estimate is carried as an
 * exponent: the target is 2^(-eps_theta_exponent).
 */
struct ProtocolParams {
    std::uint64_t total_pulses = 1'000'000;
    std::uint64_t planned_x_count = 20'000;
    double eps_theta_exponent = 100.0;
    std::uint32_t t_e = 100;
    double efficiency_ratio = 1.0;  ///< min/max detector efficiency, in (0,1]

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;
};

/**
 * @brief Failure probabilities of a finished session.
 *
 * Both the linear values and their base-2 logarithms are kept; the log2
 * fields are authoritative when the linear ones underflow.
 */
struct SecurityReport {
    double eps_f = 0.0;  ///< fidelity-measure failure probability
    double eps_t = 0.0;  ///< trace-distance security parameter
    double log2_eps_f = 0.0;
    double log2_eps_t = 0.0;
};

/// Result of an output-length computation. `abort` is set when the error
/// rate fed to the entropy term reaches 1/2 or when no bits remain.
struct ExtractableLength {
    std::int64_t bits = 0;
    bool abort = false;
};

/// H(e) = -e log2 e - (1-e) log2(1-e); H(0) = H(1) = 0.
/// Throws std::domain_error outside [0,1].
double binary_entropy(double e);

/// H'(e) = log2((1-e)/e), defined on the open interval (0,1).
double binary_entropy_derivative(double e);

/// xi(theta) = H(e+theta-q*theta) - q H(e) - (1-q) H(e+theta).
double xi(double theta, double e_bx, double q_x);

/**
 * @brief log2 of the sampling failure bound, clamped to 0 (probability 1).
 *
 * bound = [q(1-q) e(1-e) n]^(-1/2) * 2^(-n xi(theta)). Evaluated entirely in
 * the log domain. e_bx must be strictly positive: callers substitute 1/n_x
 * for an error-free sample before getting here.
 */
double log2_eps_theta_bound(std::uint64_t n, double q_x, double e_bx, double theta);

/// Linear form of log2_eps_theta_bound, in (0,1].
double eps_theta_bound(std::uint64_t n, double q_x, double e_bx, double theta);

/// floor(n_z (1 - H(e_pz_bound))) - t_e.
ExtractableLength final_length(std::uint64_t n_z, double e_pz_bound, std::uint32_t t_e);

/// floor(r n_z (1 - H(e_sum / r))) - t_e; equals final_length when r == 1.
ExtractableLength mismatch_adjusted_length(double r, std::uint64_t n_z, double e_sum,
                                           std::uint32_t t_e);

/// eps_t = sqrt(eps_f (2 - eps_f)).
double trace_distance_from_fidelity(double eps_f);

/**
 * @brief Compose the estimation and extraction failures.
 *
 * eps_f = 2^log2_eps_theta + blocks * 2^(-t_e); eps_t from eps_f. A single
 * extraction block gives the usual sqrt((eps_theta + 2^-t_e)(2 - eps_theta - 2^-t_e)).
 * Pass -infinity for an exactly-zero eps_theta. Throws std::domain_error
 * when eps_f exceeds 1.
 */
SecurityReport composed_security(double log2_eps_theta, std::uint32_t t_e,
                                 std::uint64_t blocks = 1);

/// log2(2^a + 2^b) without leaving the log domain.
double log2_add(double a, double b);

}  // namespace siqrng
