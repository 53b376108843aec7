#include "siqrng/estimation.hpp"

#include <cmath>
#include <stdexcept>

namespace siqrng {

double observed_x_error(const SessionTally& tally) {
    if (tally.n_x == 0) {
        throw std::domain_error("no X-basis sample: the error rate cannot be certified");
    }
    const double errors = static_cast<double>(tally.x_minus) + 0.5 * static_cast<double>(tally.x_double);
    const double n_x = static_cast<double>(tally.n_x);
    if (errors == 0.0) {
        return 1.0 / n_x;
    }
    return errors / n_x;
}

std::optional<double> solve_theta(std::uint64_t n, double q_x, double e_bx, double eps_exponent) {
    if (!(q_x > 0.0 && q_x < 1.0)) {
        throw std::domain_error("q_x must lie in (0,1)");
    }
    if (!(e_bx > 0.0 && e_bx < 0.5)) {
        throw std::domain_error("e_bx must lie in (0,1/2)");
    }
    if (!(eps_exponent >= 0.0)) {
        throw std::domain_error("eps_exponent must be non-negative");
    }
    const double target = -eps_exponent;
    auto meets = [&](double theta) { return log2_eps_theta_bound(n, q_x, e_bx, theta) <= target; };

    if (meets(0.0)) {
        return 0.0;
    }
    double hi = 0.5 - e_bx;
    if (!meets(hi)) {
        return std::nullopt;
    }
    double lo = 0.0;
    while (hi - lo > kThetaTolerance) {
        const double mid = lo + (hi - lo) / 2.0;
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (meets(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

std::uint64_t plan_nx(double e_bx_expected, double theta_target, double security_exponent) {
    const double y = e_bx_expected + theta_target;
    if (!(e_bx_expected > 0.0 && theta_target > 0.0 && y < 0.5)) {
        throw std::domain_error("plan_nx needs 0 < e_bx < e_bx + theta < 1/2");
    }
    if (!(security_exponent > 0.0)) {
        throw std::domain_error("security exponent must be positive");
    }
    const double denom =
        binary_entropy(y) - binary_entropy(e_bx_expected) - binary_entropy_derivative(y) * theta_target;
    if (!(denom > 0.0)) {
        throw std::domain_error("plan_nx denominator is not positive");
    }
    return static_cast<std::uint64_t>(std::ceil(security_exponent / denom));
}

EstimationResult estimate(const SessionTally& tally, const ProtocolParams& params) {
    if (!tally.consistent()) {
        throw std::invalid_argument("inconsistent session tally");
    }
    EstimationResult out;
    out.n = tally.n;
    out.n_x = tally.n_x;
    out.e_bx = observed_x_error(tally);
    if (tally.n_z == 0) {
        throw std::domain_error("no Z-basis events: nothing to certify");
    }
    if (out.e_bx >= 0.5) {
        out.theta = 0.0;
        out.log2_eps_theta = 0.0;
        out.e_pz_bound = out.e_bx;
        out.abort = true;
        return out;
    }
    const double q_x = static_cast<double>(tally.n_x) / static_cast<double>(tally.n);
    const auto theta = solve_theta(tally.n, q_x, out.e_bx, params.eps_theta_exponent);
    if (!theta) {
        out.theta = 0.5 - out.e_bx;
        out.log2_eps_theta = log2_eps_theta_bound(tally.n, q_x, out.e_bx, out.theta);
        out.e_pz_bound = 0.5;
        out.abort = true;
        return out;
    }
    out.theta = *theta;
    out.log2_eps_theta = log2_eps_theta_bound(tally.n, q_x, out.e_bx, out.theta);
    out.e_pz_bound = out.e_bx + out.theta;
    out.abort = out.e_pz_bound >= 0.5;
    return out;
}

}  // namespace siqrng
