#pragma once

// Independent reference implementations used only by the tests: high
// precision floating point, exact big integers and brute-force enumeration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace oracle {

using Real = boost::multiprecision::cpp_bin_float_50;
using Int = boost::multiprecision::cpp_int;

inline Real entropy(const Real& e) {
    if (e == 0 || e == 1) {
        return 0;
    }
    return -(e * log(e) + (1 - e) * log(1 - e)) / log(Real(2));
}

inline Real xi(const Real& theta, const Real& e, const Real& q) {
    return entropy(e + theta - q * theta) - q * entropy(e) - (1 - q) * entropy(e + theta);
}

/// log2 of the unclamped sampling bound.
inline Real log2_bound(std::uint64_t n, const Real& q, const Real& e, const Real& theta) {
    const Real two = 2;
    const Real prefactor = -log(q * (1 - q) * e * (1 - e) * Real(n)) / log(two) / 2;
    return prefactor - Real(n) * xi(theta, e, q);
}

inline Int binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) {
        return 0;
    }
    Int r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r *= n - k + i;
        r /= i;
    }
    return r;
}

/// Lexicographic rank of a sorted k-subset of {0..N-1}.
inline Int rank(const std::vector<std::uint64_t>& subset, std::uint64_t N) {
    Int r = 0;
    const std::uint64_t k = subset.size();
    std::uint64_t next = 0;
    for (std::uint64_t i = 0; i < k; ++i) {
        for (std::uint64_t v = next; v < subset[i]; ++v) {
            r += binomial(N - 1 - v, k - 1 - i);
        }
        next = subset[i] + 1;
    }
    return r;
}

/// All k-subsets of {0..N-1} in lexicographic order.
inline std::vector<std::vector<std::uint64_t>> all_subsets(std::uint64_t N, std::uint64_t k) {
    std::vector<std::vector<std::uint64_t>> out;
    std::vector<std::uint64_t> cur(k);
    for (std::uint64_t i = 0; i < k; ++i) {
        cur[i] = i;
    }
    while (true) {
        out.push_back(cur);
        std::int64_t i = static_cast<std::int64_t>(k) - 1;
        while (i >= 0 && cur[i] == N - k + static_cast<std::uint64_t>(i)) {
            --i;
        }
        if (i < 0) {
            break;
        }
        ++cur[i];
        for (std::uint64_t j = static_cast<std::uint64_t>(i) + 1; j < k; ++j) {
            cur[j] = cur[j - 1] + 1;
        }
    }
    return out;
}

/// y[i] = XOR_j seed[i - j + n - 1] x[j], straight from the matrix definition.
inline std::vector<std::uint8_t> toeplitz(const std::vector<std::uint8_t>& seed, const std::vector<std::uint8_t>& x,
                                          std::size_t k) {
    const std::size_t n = x.size();
    std::vector<std::vector<std::uint8_t>> T(k, std::vector<std::uint8_t>(n));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            T[i][j] = seed[i + n - 1 - j];
        }
    }
    std::vector<std::uint8_t> y(k, 0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            y[i] ^= T[i][j] & x[j];
        }
    }
    return y;
}

/// Asymptotic Kolmogorov distribution tail with the usual small-sample correction.
inline double kolmogorov_p(double d, std::size_t n) {
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    if (lambda < 0.3) {
        return 1.0;  // the series converges slowly here and Q(0.3) > 0.99999
    }
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-18) {
            break;
        }
    }
    return std::min(1.0, std::max(0.0, sum));
}

/// Kolmogorov-Smirnov distance of a sample from U(0,1).
inline double ks_uniform_distance(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - xs[i], xs[i] - static_cast<double>(i) / n});
    }
    return d;
}

}  // namespace oracle
