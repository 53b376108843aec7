// Command-line front end: simulate, tally, estimate, extract, test, sweep and
// the full pipeline. Exit codes: 0 success, 2 protocol abort, 1 error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "siqrng/extractor.hpp"
#include "siqrng/formats.hpp"
#include "siqrng/pipeline.hpp"
#include "siqrng/randtest.hpp"
#include "siqrng/rng.hpp"
#include "siqrng/seed_stream.hpp"

namespace fs = std::filesystem;
using namespace siqrng;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitAbort = 2;

struct CommonOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::string seed_hex;
    std::optional<std::uint32_t> t_e;
    std::optional<double> eps_exponent;
    std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--seed", o.seed_hex, "64-bit master seed in hex");
    cmd->add_option("--te", o.t_e, "extraction exponent t_e");
    cmd->add_option("--eps-exponent", o.eps_exponent, "sampling failure target 2^-N");
    cmd->add_option("--threads", o.threads, "worker threads");
}

RunConfig load_config(const CommonOptions& o) {
    RunConfig c;
    if (!o.config_path.empty()) {
        c = config_from_json(read_json_file(o.config_path));
    }
    if (!o.seed_hex.empty()) {
        c.master_seed = parse_hex_seed(o.seed_hex);
    }
    if (o.t_e) {
        c.protocol.t_e = *o.t_e;
    }
    if (o.eps_exponent) {
        c.protocol.eps_theta_exponent = *o.eps_exponent;
    }
    if (o.threads) {
        c.threads = *o.threads;
    }
    c.validate();
    return c;
}

int report_abort(const fs::path& out, const nlohmann::json& record) {
    write_json_file(out / "abort.json", record);
    std::cerr << "protocol aborted: " << record.at("reason").get<std::string>() << "\n";
    return kExitAbort;
}

std::string autocorrelation_csv(const std::vector<double>& first, const std::vector<double>* second) {
    std::ostringstream os;
    os.precision(10);
    os << (second ? "j,R_raw,R_final\n" : "j,R\n");
    for (std::size_t j = 0; j < first.size(); ++j) {
        os << j + 1 << ',' << first[j];
        if (second) {
            os << ',' << (*second)[j];
        }
        os << '\n';
    }
    return os.str();
}

/// The battery needs 100 sub-sequences long enough for every test.
bool testable(const BitBlock& bits) { return bits.size() >= 100 * 128; }

int cmd_simulate(const CommonOptions& o) {
    const RunConfig c = load_config(o);
    const fs::path out = o.out_dir;
    const BasisPlan plan = plan_session_bases(c);
    const ClickStream clicks = simulate_session(c, plan);
    write_clicks_file(out / "clicks.siqc", clicks);
    write_json_file(out / "basis_plan.json", {{"total_pulses", c.protocol.total_pulses},
                                              {"planned_x_count", c.protocol.planned_x_count},
                                              {"seed_bits", plan.seed_bits_consumed},
                                              {"windows", plan.windows}});
    return kExitOk;
}

int cmd_tally(const CommonOptions& o, const std::string& clicks_path) {
    const RunConfig c = load_config(o);
    const fs::path out = o.out_dir;
    const SessionTally t = tally_clicks(read_clicks_file(clicks_path), c.master_seed);
    write_bits_file(out / "z_bits.siq", t.z_bits);
    write_json_file(out / "tally.json", to_json(t));
    return kExitOk;
}

int cmd_estimate(const CommonOptions& o, const std::string& tally_path) {
    const RunConfig c = load_config(o);
    const fs::path out = o.out_dir;
    const auto doc = read_json_file(tally_path);
    // Estimation only needs the counts; stand in zero bits of the right length.
    const SessionTally t = tally_from_json(doc, BitBlock(doc.at("n_z").get<std::uint64_t>()));
    if (t.n_x == 0 || t.n_z == 0) {
        return report_abort(out, abort_record("estimation", "no event detected in one of the bases"));
    }
    const EstimationResult est = estimate(t, c.protocol);
    write_json_file(out / "estimation.json", to_json(est));
    if (est.abort) {
        return report_abort(out, abort_record("estimation", "phase error bound e_bx + theta reached 1/2", &est));
    }
    return kExitOk;
}

int cmd_extract(const CommonOptions& o, const std::string& z_path, const std::string& est_path,
                const std::string& toeplitz_path) {
    const RunConfig c = load_config(o);
    const fs::path out = o.out_dir;
    const BitBlock z_bits = read_bits_file(z_path);
    const EstimationResult est = estimation_from_json(read_json_file(est_path));
    if (est.abort) {
        return report_abort(out, abort_record("extraction", "estimation reported an abort", &est));
    }
    SeedStream seed = toeplitz_path.empty()
                          ? SeedStream::from_generator(derive_seed(c.master_seed, RngStream::toeplitz_seed))
                          : SeedStream(read_bits_file(toeplitz_path));
    ExtractionOptions options;
    options.efficiency_ratio = c.protocol.efficiency_ratio;
    options.block_size = c.extraction_block_bits;
    options.threads = c.threads;
    ExtractionOutput x;
    try {
        x = extract_session(z_bits, est, c.protocol.t_e, seed, options);
    } catch (const ExtractionError& e) {
        return report_abort(out, abort_record("extraction", e.what(), &est));
    }
    write_bits_file(out / "final.siq", x.bits);
    auto security = to_json(x.security);
    security["K"] = x.plan.K;
    security["n_z"] = x.plan.n_z;
    security["t_e"] = x.plan.t_e;
    security["blocks"] = x.plan.blocks.size();
    security["toeplitz_seed_bits"] = x.toeplitz_seed_bits;
    write_json_file(out / "security.json", security);
    return kExitOk;
}

int cmd_test(const CommonOptions& o, const std::string& in_path, const std::string& compare_path,
             std::uint64_t subsequences) {
    const fs::path out = o.out_dir;
    const BitBlock bits = read_bits_file(in_path);
    BatteryOptions options;
    options.subsequences = subsequences;
    const TestReport report = run_battery(bits, options);
    auto doc = to_json(report);
    if (!compare_path.empty()) {
        const BitBlock raw = read_bits_file(compare_path);
        const auto cmp = compare_raw_vs_final(raw, bits);
        doc["comparison"] = {{"raw_max_abs_autocorrelation", cmp.raw_max_abs},
                             {"final_max_abs_autocorrelation", cmp.final_max_abs},
                             {"final_below_raw", cmp.final_below_raw}};
        write_text_atomic(out / "autocorrelation.csv", autocorrelation_csv(cmp.raw_curve, &cmp.final_curve));
    } else {
        write_text_atomic(out / "autocorrelation.csv", autocorrelation_csv(report.autocorrelation, nullptr));
    }
    write_json_file(out / "report.json", doc);
    for (const auto& t : report.tests) {
        std::cout << t.name << ": P=" << t.p_value << " proportion=" << t.proportion_pass
                  << (t.pass ? " pass" : " FAIL") << "\n";
    }
    return kExitOk;
}

int cmd_sweep(const CommonOptions& o, const std::string& sweep_text) {
    RunConfig c = load_config(o);
    if (!sweep_text.empty()) {
        c.sweep = parse_sweep(sweep_text);
        c.validate();
    }
    const fs::path out = o.out_dir;
    const auto points = run_sweep(c);
    const std::string csv = curve_csv(points);
    write_text_atomic(out / "curve.csv", csv);
    std::cout << csv;
    return kExitOk;
}

int cmd_pipeline(const CommonOptions& o, const std::string& toeplitz_path) {
    const RunConfig c = load_config(o);
    const fs::path out = o.out_dir;
    std::optional<BitBlock> toeplitz;
    if (!toeplitz_path.empty()) {
        toeplitz = read_bits_file(toeplitz_path);
    }
    const SessionResult r = run_pipeline(c, toeplitz);
    write_json_file(out / "config.json", to_json(c));
    write_clicks_file(out / "clicks.siqc", r.clicks);
    write_bits_file(out / "z_bits.siq", r.tally.z_bits);
    write_json_file(out / "tally.json", to_json(r.tally));
    if (r.tally.n_x > 0 && r.tally.n_z > 0) {
        write_json_file(out / "estimation.json", to_json(r.estimation));
    }
    write_json_file(out / "seed_ledger.json", to_json(r.ledger));
    if (r.aborted) {
        const bool estimated = r.tally.n_x > 0 && r.tally.n_z > 0;
        const bool in_estimation = !estimated || r.estimation.abort;
        return report_abort(out, abort_record(in_estimation ? "estimation" : "extraction", r.abort_reason,
                                              estimated ? &r.estimation : nullptr));
    }
    const auto& x = *r.extraction;
    write_bits_file(out / "final.siq", x.bits);
    auto security = to_json(x.security);
    security["K"] = x.plan.K;
    security["blocks"] = x.plan.blocks.size();
    write_json_file(out / "security.json", security);
    if (testable(x.bits)) {
        const TestReport report = run_battery(x.bits);
        write_json_file(out / "report.json", to_json(report));
        write_text_atomic(out / "autocorrelation.csv", autocorrelation_csv(report.autocorrelation, nullptr));
    }
    std::cout << "K=" << x.plan.K << " eps_t=" << x.security.eps_t << " seed_bits=" << r.ledger.total() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Source-independent quantum random number post-processing"};
    app.require_subcommand(1);

    CommonOptions common;
    std::string clicks_path;
    std::string tally_path;
    std::string z_path;
    std::string est_path;
    std::string toeplitz_path;
    std::string bits_path;
    std::string compare_path;
    std::string sweep_text;
    std::uint64_t subsequences = 100;

    auto* simulate = app.add_subcommand("simulate", "simulate a session and write click records");
    add_common(simulate, common);

    auto* tally = app.add_subcommand("tally", "squash click records into a tally and raw Z bits");
    add_common(tally, common);
    tally->add_option("--in", clicks_path, "click-record file")->required()->check(CLI::ExistingFile);

    auto* estimate_cmd = app.add_subcommand("estimate", "bound the phase error from a tally");
    add_common(estimate_cmd, common);
    estimate_cmd->add_option("--tally", tally_path, "tally JSON")->required()->check(CLI::ExistingFile);

    auto* extract = app.add_subcommand("extract", "Toeplitz-hash raw Z bits into final output");
    add_common(extract, common);
    extract->add_option("--z-bits", z_path, "raw Z-bit file")->required()->check(CLI::ExistingFile);
    extract->add_option("--estimation", est_path, "estimation JSON")->required()->check(CLI::ExistingFile);
    extract->add_option("--toeplitz-seed", toeplitz_path, "packed-bit file holding the Toeplitz seed")
        ->check(CLI::ExistingFile);

    auto* test = app.add_subcommand("test", "run the statistical battery on a packed-bit file");
    add_common(test, common);
    test->add_option("--in", bits_path, "packed-bit file")->required()->check(CLI::ExistingFile);
    test->add_option("--compare", compare_path, "raw packed-bit file for the autocorrelation comparison")
        ->check(CLI::ExistingFile);
    test->add_option("--subsequences", subsequences, "number of sub-sequences")->check(CLI::PositiveNumber);

    auto* sweep = app.add_subcommand("sweep", "evaluate a parameter sweep and write curve.csv");
    add_common(sweep, common);
    sweep->add_option("--sweep", sweep_text, "KEY=v1,v2,... with KEY loss_db or mean_photon_number");

    auto* pipeline = app.add_subcommand("pipeline", "run every stage and write all artifacts");
    add_common(pipeline, common);
    pipeline->add_option("--toeplitz-seed", toeplitz_path, "packed-bit file holding the Toeplitz seed")
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitError;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(common);
        }
        if (tally->parsed()) {
            return cmd_tally(common, clicks_path);
        }
        if (estimate_cmd->parsed()) {
            return cmd_estimate(common, tally_path);
        }
        if (extract->parsed()) {
            return cmd_extract(common, z_path, est_path, toeplitz_path);
        }
        if (test->parsed()) {
            return cmd_test(common, bits_path, compare_path, subsequences);
        }
        if (sweep->parsed()) {
            return cmd_sweep(common, sweep_text);
        }
        if (pipeline->parsed()) {
            return cmd_pipeline(common, toeplitz_path);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
