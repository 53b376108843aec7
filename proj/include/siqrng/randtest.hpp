#pragma once

#include <cstdint>
#include <stdexcept>
#include <span>
#include <string>
#include <vector>

#include "siqrng/bitblock.hpp"

namespace siqrng {

/// Significance level of every P-value.
inline constexpr double kPValueThreshold = 0.01;
/// Minimum fraction of sub-sequences that must pass each test.
inline constexpr double kProportionThreshold = 0.96;

/// Constant input: the sample variance vanishes.
class DegenerateSequence : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct TestResult {
    std::string name;
    double statistic = 0.0;
    double p_value = 0.0;
    bool pass = false;
};

/**
 * @brief Sample autocorrelation R(1..max_lag).
 *
 * R(j) = (1/n) sum_{i<n-j} (x_i - m)(x_{i+j} - m) / s^2 with sample mean m and
 * biased variance s^2 = m (1 - m), both over the whole block.
 * Requires size >= max_lag + 2 and a non-constant block.
 */
std::vector<double> autocorrelation(const BitBlock& bits, std::uint64_t max_lag);

/// Frequency test, n >= 100.
TestResult monobit_test(const BitBlock& bits);

/// Frequency within blocks of block_len bits, n >= 100 and at least one block.
TestResult block_frequency_test(const BitBlock& bits, std::uint64_t block_len = 128);

/// Runs test, n >= 100. Fails with p = 0 when the frequency pre-test fails.
TestResult runs_test(const BitBlock& bits);

/**
 * Longest run of ones within blocks, n >= 128. Block length is 8, 128 or
 * 10^4 depending on n (thresholds 6272 and 750000).
 */
TestResult longest_run_test(const BitBlock& bits);

enum class CusumMode { forward, backward };

/// Cumulative sums test, n >= 100.
TestResult cusum_test(const BitBlock& bits, CusumMode mode = CusumMode::forward);

/**
 * Class probabilities for the longest-run test with block length M: the
 * first class is "longest run <= lo", the last ">= lo + classes - 1".
 * Computed exactly by dynamic programming.
 */
std::vector<double> longest_run_class_probabilities(std::uint64_t M, unsigned lo, unsigned classes);

/// P-value of uniformity of p-values over 10 equal bins (chi-square, 9 dof).
double uniformity_p_value(const std::vector<double>& p_values);

struct TestRecord {
    std::string name;
    double statistic = 0.0;         ///< full-sequence statistic
    double full_p_value = 0.0;      ///< full-sequence P-value, informational
    double p_value = 0.0;           ///< uniformity of the sub-sequence P-values
    double proportion_pass = 0.0;   ///< fraction of sub-sequences with p >= 0.01
    std::vector<double> subsequence_p_values;
    bool pass = false;              ///< p_value >= 0.01 and proportion_pass >= 0.96
};

struct TestReport {
    std::uint64_t bits = 0;
    std::uint64_t subsequences = 0;
    std::vector<TestRecord> tests;
    double proportion_pass = 0.0;  ///< smallest proportion over the tests
    std::vector<double> autocorrelation;
    bool all_pass = false;
};

struct BatteryOptions {
    std::uint64_t subsequences = 100;
    std::uint64_t block_len = 128;
    std::uint64_t max_lag = 100;
};

/**
 * Run every implemented test on `subsequences` equal, disjoint pieces of the
 * input (trailing bits beyond a whole piece are dropped from that part) and on
 * the whole input.
 */
TestReport run_battery(const BitBlock& bits, const BatteryOptions& options = {});

struct RawFinalComparison {
    std::vector<double> raw_curve;
    std::vector<double> final_curve;
    double raw_max_abs = 0.0;
    double final_max_abs = 0.0;
    bool final_below_raw = false;
};

/// Autocorrelation curves of raw and extracted data; both need >= 10^5 bits.
RawFinalComparison compare_raw_vs_final(const BitBlock& raw, const BitBlock& final_bits, std::uint64_t max_lag = 100);

}  // namespace siqrng
