#include "siqrng/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "siqrng/rng.hpp"
#include "siqrng/seed_stream.hpp"

namespace siqrng {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) {
        throw std::invalid_argument(where + " must be a JSON object");
    }
    for (const auto& item : obj.items()) {
        if (!allowed.contains(item.key())) {
            throw std::invalid_argument("unknown key '" + item.key() + "' in " + where);
        }
    }
}

template <typename T>
void read_if(const json& obj, const char* key, T& target) {
    if (obj.contains(key)) {
        try {
            target = obj.at(key).get<T>();
        } catch (const json::exception& e) {
            throw std::invalid_argument(std::string("bad value for ") + key + ": " + e.what());
        }
    }
}

std::uint64_t parse_seed(const json& value) {
    if (value.is_number_unsigned()) {
        return value.get<std::uint64_t>();
    }
    if (!value.is_string()) {
        throw std::invalid_argument("master_seed must be an unsigned integer or a hex string");
    }
    return parse_hex_seed(value.get<std::string>());
}

std::string hex_seed(std::uint64_t seed) {
    std::ostringstream os;
    os << "0x" << std::hex << seed;
    return os.str();
}

const char* sweep_name(SweepKey key) { return key == SweepKey::loss_db ? "loss_db" : "mean_photon_number"; }

SweepKey sweep_key_from(const std::string& name) {
    if (name == "loss_db") {
        return SweepKey::loss_db;
    }
    if (name == "mean_photon_number") {
        return SweepKey::mean_photon_number;
    }
    throw std::invalid_argument("cannot sweep over '" + name + "' (use loss_db or mean_photon_number)");
}

}  // namespace

std::uint64_t parse_hex_seed(const std::string& original) {
    std::string_view text = original;
    if (text.starts_with("0x") || text.starts_with("0X")) {
        text.remove_prefix(2);
    }
    std::uint64_t seed = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), seed, 16);
    if (text.empty() || text.size() > 16 || ec != std::errc() || end != text.data() + text.size()) {
        throw std::invalid_argument("not a 64-bit hex seed: '" + original + "'");
    }
    return seed;
}

void RunConfig::validate() const {
    protocol.validate();
    setup.validate();
    if (!(repetition_rate_hz > 0.0) || !std::isfinite(repetition_rate_hz)) {
        throw std::invalid_argument("repetition_rate_hz must be positive");
    }
    if (!(dead_time_ns > 0.0) || !std::isfinite(dead_time_ns)) {
        throw std::invalid_argument("dead_time_ns must be positive");
    }
    if (extraction_block_bits == 0) {
        throw std::invalid_argument("extraction_block_bits must be positive");
    }
    if (threads == 0) {
        throw std::invalid_argument("threads must be at least 1");
    }
    if (sweep) {
        for (double v : sweep->values) {
            apply_sweep_value(*this, sweep->key, v).setup.validate();
        }
    }
}

RunConfig config_from_json(const json& doc) {
    check_keys(doc,
               {"protocol", "source", "channel", "detector", "master_seed", "repetition_rate_hz", "dead_time_ns",
                "extraction_block_bits", "threads", "sweep"},
               "config");
    RunConfig c;
    if (doc.contains("protocol")) {
        const auto& p = doc.at("protocol");
        check_keys(p, {"total_pulses", "planned_x_count", "eps_theta_exponent", "t_e", "efficiency_ratio"},
                   "protocol");
        read_if(p, "total_pulses", c.protocol.total_pulses);
        read_if(p, "planned_x_count", c.protocol.planned_x_count);
        read_if(p, "eps_theta_exponent", c.protocol.eps_theta_exponent);
        read_if(p, "t_e", c.protocol.t_e);
        read_if(p, "efficiency_ratio", c.protocol.efficiency_ratio);
    }
    if (doc.contains("source")) {
        const auto& s = doc.at("source");
        check_keys(s, {"mean_photon_number", "misalignment", "mode"}, "source");
        read_if(s, "mean_photon_number", c.setup.source.mean_photon_number);
        read_if(s, "misalignment", c.setup.source.misalignment);
        if (s.contains("mode")) {
            const auto mode = s.at("mode").get<std::string>();
            if (mode == "honest_plus") {
                c.setup.source.mode = SourceMode::honest_plus;
            } else if (mode == "adversarial_fixed_z") {
                c.setup.source.mode = SourceMode::adversarial_fixed_z;
            } else {
                throw std::invalid_argument("unknown source mode '" + mode + "'");
            }
        }
    }
    if (doc.contains("channel")) {
        const auto& ch = doc.at("channel");
        check_keys(ch, {"loss_db"}, "channel");
        read_if(ch, "loss_db", c.setup.channel.loss_db);
    }
    if (doc.contains("detector")) {
        const auto& d = doc.at("detector");
        check_keys(d, {"efficiency", "dark_count_per_gate"}, "detector");
        read_if(d, "efficiency", c.setup.detector.efficiency);
        read_if(d, "dark_count_per_gate", c.setup.detector.dark_count_per_gate);
    }
    if (doc.contains("master_seed")) {
        c.master_seed = parse_seed(doc.at("master_seed"));
    }
    read_if(doc, "repetition_rate_hz", c.repetition_rate_hz);
    read_if(doc, "dead_time_ns", c.dead_time_ns);
    read_if(doc, "extraction_block_bits", c.extraction_block_bits);
    read_if(doc, "threads", c.threads);
    if (doc.contains("sweep")) {
        const auto& sw = doc.at("sweep");
        check_keys(sw, {"key", "values"}, "sweep");
        SweepSpec spec;
        spec.key = sweep_key_from(sw.at("key").get<std::string>());
        spec.values = sw.at("values").get<std::vector<double>>();
        c.sweep = spec;
    }
    c.validate();
    return c;
}

json to_json(const RunConfig& c) {
    json doc = {
        {"protocol",
         {{"total_pulses", c.protocol.total_pulses},
          {"planned_x_count", c.protocol.planned_x_count},
          {"eps_theta_exponent", c.protocol.eps_theta_exponent},
          {"t_e", c.protocol.t_e},
          {"efficiency_ratio", c.protocol.efficiency_ratio}}},
        {"source",
         {{"mean_photon_number", c.setup.source.mean_photon_number},
          {"misalignment", c.setup.source.misalignment},
          {"mode", c.setup.source.mode == SourceMode::honest_plus ? "honest_plus" : "adversarial_fixed_z"}}},
        {"channel", {{"loss_db", c.setup.channel.loss_db}}},
        {"detector",
         {{"efficiency", c.setup.detector.efficiency},
          {"dark_count_per_gate", c.setup.detector.dark_count_per_gate}}},
        {"master_seed", hex_seed(c.master_seed)},
        {"repetition_rate_hz", c.repetition_rate_hz},
        {"dead_time_ns", c.dead_time_ns},
        {"extraction_block_bits", c.extraction_block_bits},
        {"threads", c.threads},
    };
    if (c.sweep) {
        doc["sweep"] = {{"key", sweep_name(c.sweep->key)}, {"values", c.sweep->values}};
    }
    return doc;
}

SweepSpec parse_sweep(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
        throw std::invalid_argument("sweep must look like KEY=v1,v2,...");
    }
    SweepSpec spec;
    spec.key = sweep_key_from(text.substr(0, eq));
    std::istringstream values(text.substr(eq + 1));
    std::string item;
    while (std::getline(values, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) {
            throw std::invalid_argument("bad sweep value '" + item + "'");
        }
        spec.values.push_back(v);
    }
    if (spec.values.empty()) {
        throw std::invalid_argument("sweep lists no values");
    }
    return spec;
}

RunConfig apply_sweep_value(RunConfig config, SweepKey key, double value) {
    if (key == SweepKey::loss_db) {
        config.setup.channel.loss_db = value;
    } else {
        config.setup.source.mean_photon_number = value;
    }
    return config;
}

json to_json(const SeedLedger& ledger) {
    return {
        {"basis_bits", ledger.basis_bits},
        {"double_click_bits", ledger.double_click_bits},
        {"toeplitz_bits", ledger.toeplitz_bits},
        {"total_bits", ledger.total()},
    };
}

BasisPlan plan_session_bases(const RunConfig& config) {
    auto seed = SeedStream::from_generator(derive_seed(config.master_seed, RngStream::basis_seed));
    return plan_basis_positions(config.protocol.total_pulses, config.protocol.planned_x_count, seed);
}

ClickStream simulate_session(const RunConfig& config, const BasisPlan& plan) {
    return run_session(config.protocol.total_pulses, config.setup, plan.x_positions, config.master_seed,
                       config.threads);
}

SessionTally tally_clicks(const ClickStream& clicks, std::uint64_t master_seed) {
    auto seed = SeedStream::from_generator(derive_seed(master_seed, RngStream::double_click_seed));
    return squash_and_tally(clicks, seed);
}

namespace {

/// Estimation, or an abort reason when the session yields nothing.
std::optional<std::string> estimation_abort(const SessionTally& tally, const RunConfig& config,
                                             EstimationResult& est) {
    if (tally.n_x == 0) {
        return "no X-basis event was detected";
    }
    if (tally.n_z == 0) {
        return "no Z-basis event was detected";
    }
    est = estimate(tally, config.protocol);
    if (est.abort) {
        return "phase error bound e_bx + theta reached 1/2";
    }
    return std::nullopt;
}

}  // namespace

SessionResult run_pipeline(const RunConfig& config, const std::optional<BitBlock>& toeplitz_seed) {
    config.validate();
    SessionResult r;
    r.basis = plan_session_bases(config);
    r.clicks = simulate_session(config, r.basis);
    r.tally = tally_clicks(r.clicks, config.master_seed);
    r.ledger.basis_bits = r.basis.seed_bits_consumed;
    r.ledger.double_click_bits = r.tally.seed_bits_consumed;

    if (auto reason = estimation_abort(r.tally, config, r.estimation)) {
        r.aborted = true;
        r.abort_reason = *reason;
        return r;
    }
    SeedStream seed = toeplitz_seed ? SeedStream(*toeplitz_seed)
                                    : SeedStream::from_generator(derive_seed(config.master_seed, RngStream::toeplitz_seed));
    ExtractionOptions options;
    options.efficiency_ratio = config.protocol.efficiency_ratio;
    options.block_size = config.extraction_block_bits;
    options.threads = config.threads;
    try {
        r.extraction = extract_session(r.tally.z_bits, r.estimation, config.protocol.t_e, seed, options);
    } catch (const ExtractionError& e) {
        r.aborted = true;
        r.abort_reason = e.what();
        return r;
    }
    r.ledger.toeplitz_bits = r.extraction->toeplitz_seed_bits;
    return r;
}

CurvePoint evaluate_point(const RunConfig& config) {
    config.validate();
    CurvePoint pt;
    pt.loss_db = config.setup.channel.loss_db;
    pt.mean_photon_number = config.setup.source.mean_photon_number;
    pt.eps_t = std::numeric_limits<double>::quiet_NaN();

    const BasisPlan plan = plan_session_bases(config);
    const SessionTally tally = tally_clicks(simulate_session(config, plan), config.master_seed);
    pt.n = tally.n;
    pt.n_x = tally.n_x;
    pt.n_z = tally.n_z;

    EstimationResult est;
    if (estimation_abort(tally, config, est)) {
        pt.abort = true;
        pt.e_bx = tally.n_x > 0 ? observed_x_error(tally) : std::numeric_limits<double>::quiet_NaN();
        pt.theta = est.theta;
        pt.e_pz_bound = tally.n_x > 0 && tally.n_z > 0 ? est.e_pz_bound : std::numeric_limits<double>::quiet_NaN();
        return pt;
    }
    pt.e_bx = est.e_bx;
    pt.theta = est.theta;
    pt.e_pz_bound = est.e_pz_bound;
    try {
        const ExtractionPlan xp = make_plan(tally.n_z, est, config.protocol.t_e, config.protocol.efficiency_ratio,
                                            config.extraction_block_bits);
        pt.K = xp.K;
        pt.eps_t = composed_security(est.log2_eps_theta, config.protocol.t_e, xp.blocks.size()).eps_t;
    } catch (const ExtractionError&) {
        pt.abort = true;
        return pt;
    }
    const double duration_s = static_cast<double>(config.protocol.total_pulses) / config.repetition_rate_hz;
    const double ceiling = 1e9 / config.dead_time_ns;
    pt.rate_bits_per_s = std::min(static_cast<double>(pt.K) / duration_s, ceiling);
    return pt;
}

std::vector<CurvePoint> run_sweep(const RunConfig& config) {
    if (!config.sweep) {
        return {evaluate_point(config)};
    }
    std::vector<CurvePoint> points;
    for (double v : config.sweep->values) {
        points.push_back(evaluate_point(apply_sweep_value(config, config.sweep->key, v)));
    }
    return points;
}

std::string curve_csv(const std::vector<CurvePoint>& points) {
    std::ostringstream os;
    os.precision(10);
    os << "loss_db,mean_photon_number,n,n_x,n_z,e_bx,theta,e_pz_bound,abort,K,rate_bits_per_s,eps_t\n";
    for (const auto& p : points) {
        os << p.loss_db << ',' << p.mean_photon_number << ',' << p.n << ',' << p.n_x << ',' << p.n_z << ','
           << p.e_bx << ',' << p.theta << ',' << p.e_pz_bound << ',' << (p.abort ? 1 : 0) << ',' << p.K << ','
           << p.rate_bits_per_s << ',' << p.eps_t << '\n';
    }
    return os.str();
}

}  // namespace siqrng
