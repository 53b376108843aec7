#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "oracles.hpp"
#include "siqrng/extractor.hpp"
#include "siqrng/pipeline.hpp"
#include "siqrng/randtest.hpp"

using namespace siqrng;

namespace {

std::vector<std::uint8_t> random_bits(std::size_t n, std::mt19937_64& rng) {
    std::vector<std::uint8_t> v(n);
    for (auto& b : v) {
        b = rng() & 1U;
    }
    return v;
}

EstimationResult passing_estimate(double e_pz) {
    EstimationResult est;
    est.e_bx = e_pz;
    est.e_pz_bound = e_pz;
    est.log2_eps_theta = -100.0;
    return est;
}

constexpr ToeplitzMethod kAllMethods[] = {ToeplitzMethod::naive, ToeplitzMethod::word_parallel,
                                          ToeplitzMethod::ntt, ToeplitzMethod::automatic};

}  // namespace

TEST(Toeplitz, SmallWorkedExample) {
    const auto seed = BitBlock::from_bits(std::vector<std::uint8_t>{1, 0, 1, 1});
    const auto raw = BitBlock::from_bits(std::vector<std::uint8_t>{1, 1, 0});
    const std::vector<std::uint8_t> expected{1, 0};
    EXPECT_EQ(oracle::toeplitz(seed.to_bits(), raw.to_bits(), 2), expected);
    for (auto m : kAllMethods) {
        EXPECT_EQ(toeplitz_hash(raw, seed, 2, m).to_bits(), expected);
    }
}

TEST(Toeplitz, ZeroInputsGiveZeroOutput) {
    std::mt19937_64 rng(1);
    const auto seed = BitBlock::from_bits(random_bits(300 + 200 - 1, rng));
    const auto raw = BitBlock::from_bits(random_bits(300, rng));
    for (auto m : kAllMethods) {
        EXPECT_EQ(toeplitz_hash(BitBlock(300), seed, 200, m).popcount(), 0U);
        EXPECT_EQ(toeplitz_hash(raw, BitBlock(499), 200, m).popcount(), 0U);
    }
}

TEST(Toeplitz, FastPathsMatchNaiveOracleOnRandomInstances) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng() % 512;
        const std::size_t k = 1 + rng() % n;
        const auto seed_bits = random_bits(n + k - 1, rng);
        const auto raw_bits = random_bits(n, rng);
        const auto expected = oracle::toeplitz(seed_bits, raw_bits, k);
        const auto seed = BitBlock::from_bits(seed_bits);
        const auto raw = BitBlock::from_bits(raw_bits);
        for (auto m : kAllMethods) {
            ASSERT_EQ(toeplitz_hash(raw, seed, k, m).to_bits(), expected) << "n=" << n << " k=" << k;
        }
    }
}

TEST(Toeplitz, LargeInstancesAgreeAcrossFastPaths) {
    std::mt19937_64 rng(7);
    for (std::size_t n : {4096UL, 50'001UL}) {
        const std::size_t k = n * 3 / 4;
        const auto seed = BitBlock::from_bits(random_bits(n + k - 1, rng));
        const auto raw = BitBlock::from_bits(random_bits(n, rng));
        EXPECT_EQ(toeplitz_hash(raw, seed, k, ToeplitzMethod::word_parallel),
                  toeplitz_hash(raw, seed, k, ToeplitzMethod::ntt));
    }
}

TEST(Toeplitz, Linearity) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng() % 2000;
        const std::size_t k = 1 + rng() % n;
        const auto seed = BitBlock::from_bits(random_bits(n + k - 1, rng));
        const auto x = BitBlock::from_bits(random_bits(n, rng));
        const auto y = BitBlock::from_bits(random_bits(n, rng));
        BitBlock xy = x;
        xy ^= y;
        BitBlock sum = toeplitz_hash(x, seed, k);
        sum ^= toeplitz_hash(y, seed, k);
        ASSERT_EQ(toeplitz_hash(xy, seed, k), sum);
    }
}

TEST(Toeplitz, LengthErrors) {
    EXPECT_THROW(toeplitz_hash(BitBlock(10), BitBlock(10), 2), std::length_error);
    EXPECT_THROW(toeplitz_hash(BitBlock(0), BitBlock(1), 2), std::length_error);
    EXPECT_THROW(toeplitz_hash(BitBlock(10), BitBlock(9), 0), std::length_error);
}

TEST(MakePlan, NoErrorKeepsAllButTe) {
    const auto plan = make_plan(100'000, passing_estimate(0.0), 100);
    EXPECT_EQ(plan.K, 100'000U - 100U);
    EXPECT_EQ(plan.seed_length, 100'000U + plan.K - 1);
    ASSERT_EQ(plan.blocks.size(), 1U);
}

TEST(MakePlan, ReferenceSessionLength) {
    const oracle::Real k = oracle::Real(1'000'000) * (1 - oracle::entropy(oracle::Real(0.02)));
    const auto expected = static_cast<std::uint64_t>(floor(k)) - 100;
    const auto plan = make_plan(1'000'000, passing_estimate(0.02), 100);
    EXPECT_EQ(plan.K, expected);
    EXPECT_NEAR(static_cast<double>(plan.K), 858'456.0, 10.0);
}

TEST(MakePlan, NearHalfIsTinyButPositive) {
    const std::uint64_t n_z = 100'000'000;
    const oracle::Real k = oracle::Real(n_z) * (1 - oracle::entropy(oracle::Real(0.49)));
    const auto plan = make_plan(n_z, passing_estimate(0.49), 100, 1.0, n_z);
    EXPECT_EQ(plan.K, static_cast<std::uint64_t>(floor(k)) - 100);
    EXPECT_GT(plan.K, 0U);
    EXPECT_LT(plan.K, n_z / 1000);
}

TEST(MakePlan, ExperimentExtractionRatio) {
    // Invert 1 - H(e) = 91/115 on the high-precision entropy.
    oracle::Real lo = 0, hi = 0.5;
    const oracle::Real target = oracle::Real(91) / 115;
    for (int i = 0; i < 200; ++i) {
        const oracle::Real mid = (lo + hi) / 2;
        (1 - oracle::entropy(mid) > target ? lo : hi) = mid;
    }
    const double e = static_cast<double>(hi);
    EXPECT_NEAR(e, 0.033, 0.001);
    const auto plan = make_plan(115'000, passing_estimate(e), 100);
    EXPECT_NEAR(static_cast<double>(plan.K) / 115'000.0, 91.0 / 115.0, 0.01);
}

TEST(MakePlan, Errors) {
    EstimationResult aborted = passing_estimate(0.3);
    aborted.abort = true;
    EXPECT_THROW(make_plan(1000, aborted, 100), ExtractionError);
    EXPECT_THROW(make_plan(0, passing_estimate(0.01), 100), ExtractionError);
    EXPECT_THROW(make_plan(500, passing_estimate(0.3), 100), ExtractionError);
    EXPECT_THROW(make_plan(1000, passing_estimate(0.01), 100, 1.0, 0), std::invalid_argument);
}

TEST(MakePlan, SubBlocksAreNearlyEqualAndShareOneSeed) {
    const auto plan = make_plan(1'000'003, passing_estimate(0.05), 100, 1.0, 100'000);
    ASSERT_EQ(plan.blocks.size(), 11U);
    std::uint64_t offset = 0, total = 0, longest = 0;
    for (const auto& b : plan.blocks) {
        EXPECT_EQ(b.offset, offset);
        EXPECT_LE(b.raw_bits, 100'000U);
        EXPECT_GE(b.raw_bits, 1'000'003U / 11);
        EXPECT_EQ(b.output_bits, static_cast<std::uint64_t>(final_length(b.raw_bits, 0.05, 100).bits));
        offset += b.raw_bits;
        total += b.output_bits;
        longest = std::max(longest, b.seed_bits());
    }
    EXPECT_EQ(offset, 1'000'003U);
    EXPECT_EQ(plan.K, total);
    EXPECT_EQ(plan.seed_length, longest);
}

TEST(MakePlan, EfficiencyMismatchShortensOutput) {
    const auto even = make_plan(1'000'000, passing_estimate(0.05), 100, 1.0);
    const auto skewed = make_plan(1'000'000, passing_estimate(0.05), 100, 0.9);
    EXPECT_LT(skewed.K, even.K);
    EXPECT_EQ(skewed.K, static_cast<std::uint64_t>(mismatch_adjusted_length(0.9, 1'000'000, 0.05, 100).bits));
}

TEST(Extract, BlocksUseSeedPrefixesAndThreadsAgree) {
    std::mt19937_64 rng(11);
    const auto raw = BitBlock::from_bits(random_bits(300'000, rng));
    const auto plan = make_plan(raw.size(), passing_estimate(0.05), 100, 1.0, 70'000);
    const auto seed = BitBlock::from_bits(random_bits(plan.seed_length, rng));
    const auto out = toeplitz_extract(raw, seed, plan);
    ASSERT_EQ(out.size(), plan.K);
    std::uint64_t pos = 0;
    for (const auto& b : plan.blocks) {
        const auto expected =
            toeplitz_hash(raw.slice(b.offset, b.raw_bits), seed.slice(0, b.seed_bits()), b.output_bits);
        EXPECT_EQ(out.slice(pos, b.output_bits), expected);
        pos += b.output_bits;
    }
    EXPECT_EQ(toeplitz_extract(raw, seed, plan, ToeplitzMethod::automatic, 3), out);
    EXPECT_THROW(toeplitz_extract(raw.slice(0, 1000), seed, plan), std::length_error);
    EXPECT_THROW(toeplitz_extract(raw, seed.slice(0, 1000), plan), std::length_error);
}

TEST(Extract, SessionSecurityAndDeterminism) {
    std::mt19937_64 rng(12);
    const auto raw = BitBlock::from_bits(random_bits(200'000, rng));
    const auto est = passing_estimate(0.04);
    auto s1 = SeedStream::from_generator(99);
    auto s2 = SeedStream::from_generator(99);
    const auto a = extract_session(raw, est, 100, s1);
    const auto b = extract_session(raw, est, 100, s2);
    EXPECT_EQ(a.bits, b.bits);
    EXPECT_EQ(a.toeplitz_seed_bits, a.plan.seed_length);
    EXPECT_EQ(s1.consumed(), a.plan.seed_length);
    EXPECT_NEAR(a.security.eps_t / (2.0 * std::pow(2.0, -50)), 1.0, 1e-12);
    EXPECT_THROW(extract_session(BitBlock(0), est, 100, s1), ExtractionError);

    SeedStream short_seed(BitBlock(1000));
    EXPECT_THROW(extract_session(raw, est, 100, short_seed), SeedExhausted);
}

TEST(Extract, ReusedSeedAcrossSimulatedBlocksPassesBattery) {
    RunConfig config;
    config.protocol.total_pulses = 3'000'000;
    config.protocol.planned_x_count = 30'000;
    config.extraction_block_bits = 1 << 16;
    const auto result = run_pipeline(config);
    ASSERT_FALSE(result.aborted) << result.abort_reason;
    ASSERT_GT(result.extraction->plan.blocks.size(), 10U);
    const auto report = run_battery(result.extraction->bits);
    for (const auto& t : report.tests) {
        EXPECT_TRUE(t.pass) << t.name << " P=" << t.p_value << " proportion=" << t.proportion_pass;
    }
}
