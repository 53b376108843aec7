#include "siqrng/entropy_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace siqrng {

namespace {

void require_unit_interval(double e, const char* what) {
    if (!(e >= 0.0 && e <= 1.0)) {
        throw std::domain_error(std::string(what) + " must lie in [0,1], got " + std::to_string(e));
    }
}

}  // namespace

void ProtocolParams::validate() const {
    if (planned_x_count == 0 || planned_x_count >= total_pulses) {
        throw std::invalid_argument("planned_x_count must satisfy 0 < N_x < N");
    }
    if (!(eps_theta_exponent > 0.0)) {
        throw std::invalid_argument("eps_theta_exponent must be positive");
    }
    if (t_e < 1) {
        throw std::invalid_argument("t_e must be at least 1");
    }
    if (!(efficiency_ratio > 0.0 && efficiency_ratio <= 1.0)) {
        throw std::invalid_argument("efficiency_ratio must lie in (0,1]");
    }
}

double binary_entropy(double e) {
    require_unit_interval(e, "binary_entropy argument");
    if (e == 0.0 || e == 1.0) {
        return 0.0;
    }
    return -e * std::log2(e) - (1.0 - e) * std::log2(1.0 - e);
}

double binary_entropy_derivative(double e) {
    if (!(e > 0.0 && e < 1.0)) {
        throw std::domain_error("binary_entropy_derivative diverges outside (0,1)");
    }
    return std::log2((1.0 - e) / e);
}

double xi(double theta, double e_bx, double q_x) {
    if (!(theta >= 0.0)) {
        throw std::domain_error("theta must be non-negative");
    }
    require_unit_interval(e_bx, "e_bx");
    require_unit_interval(q_x, "q_x");
    const double mixed = e_bx + theta - q_x * theta;
    const double shifted = e_bx + theta;
    require_unit_interval(mixed, "e_bx + theta - q_x theta");
    require_unit_interval(shifted, "e_bx + theta");
    return binary_entropy(mixed) - q_x * binary_entropy(e_bx) - (1.0 - q_x) * binary_entropy(shifted);
}

double log2_eps_theta_bound(std::uint64_t n, double q_x, double e_bx, double theta) {
    if (n == 0) {
        throw std::domain_error("sample size must be positive");
    }
    if (!(q_x > 0.0 && q_x < 1.0)) {
        throw std::domain_error("q_x must lie in (0,1)");
    }
    if (!(e_bx > 0.0 && e_bx < 1.0)) {
        throw std::domain_error("e_bx must lie in (0,1); substitute 1/n_x for an error-free sample");
    }
    const double nd = static_cast<double>(n);
    const double log2_prefactor =
        -0.5 * (std::log2(q_x) + std::log2(1.0 - q_x) + std::log2(e_bx) + std::log2(1.0 - e_bx) + std::log2(nd));
    const double log2_bound = log2_prefactor - nd * xi(theta, e_bx, q_x);
    return std::min(0.0, log2_bound);
}

double eps_theta_bound(std::uint64_t n, double q_x, double e_bx, double theta) {
    return std::exp2(log2_eps_theta_bound(n, q_x, e_bx, theta));
}

ExtractableLength final_length(std::uint64_t n_z, double e_pz_bound, std::uint32_t t_e) {
    if (n_z == 0) {
        throw std::domain_error("final_length needs n_z >= 1");
    }
    require_unit_interval(e_pz_bound, "e_pz_bound");
    const double kept = std::floor(static_cast<double>(n_z) * (1.0 - binary_entropy(e_pz_bound)));
    ExtractableLength out;
    out.bits = static_cast<std::int64_t>(kept) - static_cast<std::int64_t>(t_e);
    out.abort = out.bits <= 0 || e_pz_bound >= 0.5;
    return out;
}

ExtractableLength mismatch_adjusted_length(double r, std::uint64_t n_z, double e_sum, std::uint32_t t_e) {
    if (!(r > 0.0 && r <= 1.0)) {
        throw std::domain_error("efficiency ratio must lie in (0,1]");
    }
    if (n_z == 0) {
        throw std::domain_error("mismatch_adjusted_length needs n_z >= 1");
    }
    const double scaled = e_sum / r;
    ExtractableLength out;
    if (scaled >= 0.5) {
        // The entropy term is no longer a bound on the leaked information.
        out.abort = true;
        out.bits = scaled <= 1.0 ? static_cast<std::int64_t>(std::floor(
                                       r * static_cast<double>(n_z) * (1.0 - binary_entropy(scaled)))) -
                                       static_cast<std::int64_t>(t_e)
                                 : -static_cast<std::int64_t>(t_e);
        return out;
    }
    require_unit_interval(scaled, "(e_bx + theta) / r");
    const double kept = std::floor(r * static_cast<double>(n_z) * (1.0 - binary_entropy(scaled)));
    out.bits = static_cast<std::int64_t>(kept) - static_cast<std::int64_t>(t_e);
    out.abort = out.bits <= 0;
    return out;
}

double trace_distance_from_fidelity(double eps_f) {
    require_unit_interval(eps_f, "eps_f");
    return std::sqrt(eps_f * (2.0 - eps_f));
}

double log2_add(double a, double b) {
    if (a < b) {
        std::swap(a, b);
    }
    if (b == -std::numeric_limits<double>::infinity()) {
        return a;
    }
    return a + std::log1p(std::exp2(b - a)) / std::log(2.0);
}

SecurityReport composed_security(double log2_eps_theta, std::uint32_t t_e, std::uint64_t blocks) {
    if (log2_eps_theta > 0.0) {
        throw std::domain_error("eps_theta must not exceed 1");
    }
    if (blocks == 0) {
        throw std::domain_error("at least one extraction block is required");
    }
    const double log2_extraction = std::log2(static_cast<double>(blocks)) - static_cast<double>(t_e);
    SecurityReport report;
    report.log2_eps_f = log2_add(log2_eps_theta, log2_extraction);
    if (report.log2_eps_f > 0.0) {
        throw std::domain_error("composed failure probability exceeds 1");
    }
    report.eps_f = std::exp2(report.log2_eps_f);
    report.log2_eps_t = 0.5 * (report.log2_eps_f + std::log2(2.0 - report.eps_f));
    report.eps_t = std::exp2(report.log2_eps_t);
    return report;
}

}  // namespace siqrng
