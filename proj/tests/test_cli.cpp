#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "siqrng/formats.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kBinary = SIQRNG_CLI_PATH;

int run(const std::string& args) {
    const std::string cmd = kBinary.string() + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("siqrng_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path& dir, const std::string& body) {
    const auto path = dir / "config.in.json";
    std::ofstream(path) << body;
    return path;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kSmall = R"({"protocol": {"total_pulses": 500000, "planned_x_count": 15000}})";

}  // namespace

TEST(Cli, PipelineSucceedsAndWritesArtifacts) {
    const auto dir = fresh_dir("pipeline");
    const auto cfg = write_config(dir, kSmall);
    ASSERT_EQ(run("pipeline --config " + cfg.string() + " --out " + (dir / "out").string()), 0);
    for (const char* f : {"config.json", "clicks.siqc", "z_bits.siq", "tally.json", "estimation.json",
                          "seed_ledger.json", "final.siq", "security.json", "report.json", "autocorrelation.csv"}) {
        EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
    }
    const auto final_bits = siqrng::read_bits_file(dir / "out" / "final.siq");
    EXPECT_GT(final_bits.size(), 0U);
    const auto ledger = siqrng::read_json_file(dir / "out" / "seed_ledger.json");
    EXPECT_EQ(ledger.at("toeplitz_bits").get<std::uint64_t>() + ledger.at("basis_bits").get<std::uint64_t>() +
                  ledger.at("double_click_bits").get<std::uint64_t>(),
              ledger.at("total_bits").get<std::uint64_t>());
}

TEST(Cli, OutputsAreByteIdenticalAcrossRunsAndThreads) {
    const auto dir = fresh_dir("repro");
    const auto cfg = write_config(dir, kSmall);
    ASSERT_EQ(run("pipeline --config " + cfg.string() + " --out " + (dir / "a").string()), 0);
    ASSERT_EQ(run("pipeline --config " + cfg.string() + " --threads 3 --out " + (dir / "b").string()), 0);
    for (const char* f : {"clicks.siqc", "z_bits.siq", "tally.json", "estimation.json", "final.siq",
                          "security.json", "report.json", "autocorrelation.csv"}) {
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    }
    ASSERT_EQ(run("pipeline --config " + cfg.string() + " --seed 0x1234 --out " + (dir / "c").string()), 0);
    EXPECT_NE(slurp(dir / "a" / "final.siq"), slurp(dir / "c" / "final.siq"));
}

TEST(Cli, StagewiseRunMatchesPipeline) {
    const auto dir = fresh_dir("stages");
    const auto cfg = write_config(dir, kSmall);
    const std::string common = " --config " + cfg.string() + " --out " + dir.string();
    ASSERT_EQ(run("pipeline --config " + cfg.string() + " --out " + (dir / "whole").string()), 0);
    ASSERT_EQ(run("simulate" + common), 0);
    ASSERT_EQ(run("tally --in " + (dir / "clicks.siqc").string() + common), 0);
    ASSERT_EQ(run("estimate --tally " + (dir / "tally.json").string() + common), 0);
    ASSERT_EQ(run("extract --z-bits " + (dir / "z_bits.siq").string() + " --estimation " +
                  (dir / "estimation.json").string() + common),
              0);
    ASSERT_EQ(run("test --in " + (dir / "final.siq").string() + " --compare " + (dir / "z_bits.siq").string() + common),
              0);
    for (const char* f : {"clicks.siqc", "z_bits.siq", "tally.json", "estimation.json", "final.siq"}) {
        EXPECT_EQ(slurp(dir / f), slurp(dir / "whole" / f)) << f;
    }
    EXPECT_TRUE(fs::exists(dir / "report.json"));
    const auto header = slurp(dir / "autocorrelation.csv").substr(0, 20);
    EXPECT_TRUE(header.starts_with("j,")) << header;
}

TEST(Cli, AdversarialSourceExitsTwoWithAbortRecord) {
    const auto dir = fresh_dir("abort");
    const auto cfg = write_config(
        dir, R"({"protocol": {"total_pulses": 300000, "planned_x_count": 10000}, "source": {"mode": "adversarial_fixed_z"}})");
    EXPECT_EQ(run("pipeline --config " + cfg.string() + " --out " + dir.string()), 2);
    const auto record = siqrng::read_json_file(dir / "abort.json");
    EXPECT_TRUE(record.contains("stage"));
    EXPECT_TRUE(record.contains("reason"));
    EXPECT_FALSE(fs::exists(dir / "final.siq"));
}

TEST(Cli, ErrorsExitOne) {
    const auto dir = fresh_dir("errors");
    EXPECT_EQ(run("pipeline --config " + write_config(dir, R"({"bogus": 1})").string() + " --out " + dir.string()), 1);
    EXPECT_EQ(run("pipeline --seed nothex --out " + dir.string()), 1);
    EXPECT_EQ(run("frobnicate"), 1);
    EXPECT_EQ(run("test --in " + (dir / "missing.siq").string()), 1);
    std::ofstream(dir / "junk.siq") << "not a bit file";
    EXPECT_EQ(run("test --in " + (dir / "junk.siq").string() + " --out " + dir.string()), 1);
    EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, SweepWritesMonotoneCurve) {
    const auto dir = fresh_dir("sweep");
    ASSERT_EQ(run("sweep --sweep loss_db=0,10,20,40 --out " + dir.string()), 0);
    std::ifstream in(dir / "curve.csv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "loss_db,mean_photon_number,n,n_x,n_z,e_bx,theta,e_pz_bound,abort,K,rate_bits_per_s,eps_t");
    std::uint64_t previous_k = ~0ULL;
    int rows = 0;
    while (std::getline(in, line)) {
        std::vector<std::string> cols;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) {
            cols.push_back(c);
        }
        ASSERT_EQ(cols.size(), 12U) << line;
        const auto k = std::stoull(cols[9]);
        EXPECT_LE(k, previous_k);
        previous_k = k;
        ++rows;
    }
    EXPECT_EQ(rows, 4);
}
