#include "siqrng/randtest.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

namespace siqrng {

namespace {

void require_length(const BitBlock& bits, std::uint64_t minimum, const char* test) {
    if (bits.size() < minimum) {
        throw std::length_error(std::string(test) + " needs at least " + std::to_string(minimum) + " bits, got " +
                                std::to_string(bits.size()));
    }
}

TestResult make_result(const char* name, double statistic, double p) {
    p = std::clamp(p, 0.0, 1.0);
    return {name, statistic, p, p >= kPValueThreshold};
}

double igamc(double a, double x) { return boost::math::gamma_q(a, x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Number of ones among the first `count` bits.
std::uint64_t prefix_ones(std::span<const std::uint64_t> w, std::uint64_t count) {
    std::uint64_t ones = 0;
    const std::uint64_t full = count / 64;
    for (std::uint64_t i = 0; i < full; ++i) {
        ones += std::popcount(w[i]);
    }
    if (const unsigned rest = count % 64) {
        ones += std::popcount(w[full] & ((std::uint64_t{1} << rest) - 1));
    }
    return ones;
}

/// Word `i` of the block shifted down by `shift` bits (bit k of the result is bit k + shift).
std::uint64_t shifted_word(std::span<const std::uint64_t> w, std::uint64_t i, std::uint64_t shift) {
    const std::uint64_t src = i + shift / 64;
    const unsigned s = shift % 64;
    if (src >= w.size()) {
        return 0;
    }
    std::uint64_t v = w[src] >> s;
    if (s != 0 && src + 1 < w.size()) {
        v |= w[src + 1] << (64 - s);
    }
    return v;
}

}  // namespace

std::vector<double> autocorrelation(const BitBlock& bits, std::uint64_t max_lag) {
    const std::uint64_t n = bits.size();
    if (n < max_lag + 2) {
        throw std::length_error("autocorrelation needs at least max_lag + 2 bits");
    }
    const auto w = bits.words();
    const std::uint64_t total = prefix_ones(w, n);
    if (total == 0 || total == n) {
        throw DegenerateSequence("constant sequence has zero variance");
    }
    const double dn = static_cast<double>(n);
    const double mean = static_cast<double>(total) / dn;
    const double variance = mean * (1.0 - mean);

    std::vector<double> out;
    out.reserve(max_lag);
    for (std::uint64_t j = 1; j <= max_lag; ++j) {
        // Pad bits are zero, so pairs running past the end contribute nothing.
        std::uint64_t both = 0;
        for (std::uint64_t i = 0; i < w.size(); ++i) {
            both += std::popcount(w[i] & shifted_word(w, i, j));
        }
        const double head = static_cast<double>(prefix_ones(w, n - j));
        const double tail = static_cast<double>(total - prefix_ones(w, j));
        const double pairs = static_cast<double>(n - j);
        const double cov = static_cast<double>(both) - mean * (head + tail) + pairs * mean * mean;
        out.push_back(cov / dn / variance);
    }
    return out;
}

TestResult monobit_test(const BitBlock& bits) {
    require_length(bits, 100, "monobit test");
    const double n = static_cast<double>(bits.size());
    const double s = 2.0 * static_cast<double>(bits.popcount()) - n;
    const double s_obs = std::abs(s) / std::sqrt(n);
    return make_result("monobit", s_obs, std::erfc(s_obs / std::numbers::sqrt2));
}

TestResult block_frequency_test(const BitBlock& bits, std::uint64_t block_len) {
    require_length(bits, 100, "block frequency test");
    if (block_len == 0 || bits.size() / block_len == 0) {
        throw std::length_error("block frequency test needs at least one whole block");
    }
    const std::uint64_t blocks = bits.size() / block_len;
    double chi2 = 0.0;
    for (std::uint64_t b = 0; b < blocks; ++b) {
        std::uint64_t ones = 0;
        for (std::uint64_t i = b * block_len; i < (b + 1) * block_len; ++i) {
            ones += bits.get(i);
        }
        const double dev = static_cast<double>(ones) / static_cast<double>(block_len) - 0.5;
        chi2 += dev * dev;
    }
    chi2 *= 4.0 * static_cast<double>(block_len);
    return make_result("block_frequency", chi2, igamc(static_cast<double>(blocks) / 2.0, chi2 / 2.0));
}

TestResult runs_test(const BitBlock& bits) {
    require_length(bits, 100, "runs test");
    const std::uint64_t n = bits.size();
    const double dn = static_cast<double>(n);
    const double pi = static_cast<double>(bits.popcount()) / dn;
    if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(dn)) {
        return make_result("runs", 0.0, 0.0);
    }
    const auto w = bits.words();
    std::uint64_t changes = 0;
    for (std::uint64_t i = 0; i < w.size(); ++i) {
        changes += std::popcount(w[i] ^ shifted_word(w, i, 1));
    }
    // The last bit is compared with a zero pad bit; drop that comparison.
    changes -= bits.get(n - 1) ? 1 : 0;
    const double v = static_cast<double>(changes + 1);
    const double spread = 2.0 * pi * (1.0 - pi);
    const double p = std::erfc(std::abs(v - dn * spread) / (std::sqrt(2.0 * dn) * spread));
    return make_result("runs", v, p);
}

std::vector<double> longest_run_class_probabilities(std::uint64_t M, unsigned lo, unsigned classes) {
    if (classes < 2) {
        throw std::invalid_argument("need at least two classes");
    }
    // P(longest run <= m) over M fair bits.
    auto at_most = [M](unsigned m) {
        std::vector<double> run(m + 1, 0.0);
        std::vector<double> next(m + 1, 0.0);
        run[0] = 1.0;
        for (std::uint64_t i = 0; i < M; ++i) {
            double alive = 0.0;
            for (double p : run) {
                alive += p;
            }
            std::fill(next.begin(), next.end(), 0.0);
            next[0] = alive / 2.0;
            for (unsigned r = 0; r < m; ++r) {
                next[r + 1] = run[r] / 2.0;
            }
            run.swap(next);
        }
        double total = 0.0;
        for (double p : run) {
            total += p;
        }
        return total;
    };
    std::vector<double> pi(classes);
    double previous = 0.0;
    for (unsigned c = 0; c + 1 < classes; ++c) {
        const double cumulative = at_most(lo + c);
        pi[c] = cumulative - previous;
        previous = cumulative;
    }
    pi[classes - 1] = 1.0 - previous;
    return pi;
}

TestResult longest_run_test(const BitBlock& bits) {
    require_length(bits, 128, "longest run test");
    const std::uint64_t n = bits.size();
    std::uint64_t M = 0;
    unsigned lo = 0;
    unsigned classes = 0;
    if (n < 6272) {
        M = 8, lo = 1, classes = 4;
    } else if (n < 750000) {
        M = 128, lo = 4, classes = 6;
    } else {
        M = 10000, lo = 10, classes = 7;
    }
    struct Cached {
        std::uint64_t M;
        std::vector<double> pi;
    };
    static const std::vector<Cached> table = {
        {8, longest_run_class_probabilities(8, 1, 4)},
        {128, longest_run_class_probabilities(128, 4, 6)},
        {10000, longest_run_class_probabilities(10000, 10, 7)},
    };
    const auto& pi = std::find_if(table.begin(), table.end(), [M](const Cached& c) { return c.M == M; })->pi;

    const std::uint64_t blocks = n / M;
    std::vector<std::uint64_t> counts(classes, 0);
    for (std::uint64_t b = 0; b < blocks; ++b) {
        unsigned longest = 0;
        unsigned run = 0;
        for (std::uint64_t i = b * M; i < (b + 1) * M; ++i) {
            run = bits.get(i) ? run + 1 : 0;
            longest = std::max(longest, run);
        }
        const unsigned cls = longest <= lo ? 0 : std::min(longest - lo, classes - 1);
        ++counts[cls];
    }
    double chi2 = 0.0;
    for (unsigned c = 0; c < classes; ++c) {
        const double expected = static_cast<double>(blocks) * pi[c];
        const double d = static_cast<double>(counts[c]) - expected;
        chi2 += d * d / expected;
    }
    return make_result("longest_run", chi2, igamc(static_cast<double>(classes - 1) / 2.0, chi2 / 2.0));
}

TestResult cusum_test(const BitBlock& bits, CusumMode mode) {
    require_length(bits, 100, "cumulative sums test");
    const std::uint64_t n = bits.size();
    std::int64_t s = 0;
    std::int64_t z = 0;
    for (std::uint64_t k = 0; k < n; ++k) {
        const std::uint64_t i = mode == CusumMode::forward ? k : n - 1 - k;
        s += bits.get(i) ? 1 : -1;
        z = std::max(z, s < 0 ? -s : s);
    }
    const double dn = static_cast<double>(n);
    const double dz = static_cast<double>(z);
    const double root = std::sqrt(dn);
    double sum1 = 0.0;
    for (auto k = static_cast<std::int64_t>((-dn / dz + 1.0) / 4.0);
         k <= static_cast<std::int64_t>((dn / dz - 1.0) / 4.0); ++k) {
        const double kk = static_cast<double>(k);
        sum1 += normal_cdf((4.0 * kk + 1.0) * dz / root) - normal_cdf((4.0 * kk - 1.0) * dz / root);
    }
    double sum2 = 0.0;
    for (auto k = static_cast<std::int64_t>((-dn / dz - 3.0) / 4.0);
         k <= static_cast<std::int64_t>((dn / dz - 1.0) / 4.0); ++k) {
        const double kk = static_cast<double>(k);
        sum2 += normal_cdf((4.0 * kk + 3.0) * dz / root) - normal_cdf((4.0 * kk + 1.0) * dz / root);
    }
    return make_result(mode == CusumMode::forward ? "cusum_forward" : "cusum_backward", dz, 1.0 - sum1 + sum2);
}

double uniformity_p_value(const std::vector<double>& p_values) {
    if (p_values.empty()) {
        throw std::invalid_argument("no p-values to assess");
    }
    std::array<std::uint64_t, 10> bins{};
    for (double p : p_values) {
        const auto b = static_cast<std::size_t>(std::clamp(p, 0.0, 1.0) * 10.0);
        ++bins[std::min<std::size_t>(b, 9)];
    }
    const double expected = static_cast<double>(p_values.size()) / 10.0;
    double chi2 = 0.0;
    for (auto count : bins) {
        const double d = static_cast<double>(count) - expected;
        chi2 += d * d / expected;
    }
    return igamc(4.5, chi2 / 2.0);
}

TestReport run_battery(const BitBlock& bits, const BatteryOptions& options) {
    if (options.subsequences == 0) {
        throw std::invalid_argument("need at least one sub-sequence");
    }
    TestReport report;
    report.bits = bits.size();
    report.subsequences = options.subsequences;
    const std::uint64_t piece = bits.size() / options.subsequences;

    using Runner = TestResult (*)(const BitBlock&, std::uint64_t);
    const std::vector<Runner> runners = {
        [](const BitBlock& b, std::uint64_t) { return monobit_test(b); },
        [](const BitBlock& b, std::uint64_t m) { return block_frequency_test(b, m); },
        [](const BitBlock& b, std::uint64_t) { return runs_test(b); },
        [](const BitBlock& b, std::uint64_t) { return longest_run_test(b); },
        [](const BitBlock& b, std::uint64_t) { return cusum_test(b, CusumMode::forward); },
        [](const BitBlock& b, std::uint64_t) { return cusum_test(b, CusumMode::backward); },
    };
    std::vector<BitBlock> pieces;
    pieces.reserve(options.subsequences);
    for (std::uint64_t s = 0; s < options.subsequences; ++s) {
        pieces.push_back(bits.slice(s * piece, piece));
    }

    report.proportion_pass = 1.0;
    report.all_pass = true;
    for (const auto& run : runners) {
        const TestResult full = run(bits, options.block_len);
        TestRecord rec;
        rec.name = full.name;
        rec.statistic = full.statistic;
        rec.full_p_value = full.p_value;
        std::uint64_t passed = 0;
        for (const auto& p : pieces) {
            const TestResult r = run(p, options.block_len);
            rec.subsequence_p_values.push_back(r.p_value);
            passed += r.pass ? 1 : 0;
        }
        rec.proportion_pass = static_cast<double>(passed) / static_cast<double>(pieces.size());
        rec.p_value = uniformity_p_value(rec.subsequence_p_values);
        rec.pass = rec.p_value >= kPValueThreshold && rec.proportion_pass >= kProportionThreshold;
        report.proportion_pass = std::min(report.proportion_pass, rec.proportion_pass);
        report.all_pass = report.all_pass && rec.pass;
        report.tests.push_back(std::move(rec));
    }
    report.autocorrelation = autocorrelation(bits, options.max_lag);
    return report;
}

RawFinalComparison compare_raw_vs_final(const BitBlock& raw, const BitBlock& final_bits, std::uint64_t max_lag) {
    constexpr std::uint64_t kMinimum = 100000;
    if (raw.size() < kMinimum || final_bits.size() < kMinimum) {
        throw std::length_error("raw and final blocks need at least 10^5 bits each");
    }
    RawFinalComparison out;
    out.raw_curve = autocorrelation(raw, max_lag);
    out.final_curve = autocorrelation(final_bits, max_lag);
    auto max_abs = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) {
            m = std::max(m, std::abs(x));
        }
        return m;
    };
    out.raw_max_abs = max_abs(out.raw_curve);
    out.final_max_abs = max_abs(out.final_curve);
    out.final_below_raw = out.final_max_abs < out.raw_max_abs;
    return out;
}

}  // namespace siqrng
