#include "siqrng/formats.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

#include <unistd.h>

namespace siqrng {

namespace {

constexpr std::size_t kHeaderSize = 13;

void put_header(std::vector<std::uint8_t>& out, const char (&magic)[5], std::uint64_t count) {
    out.insert(out.end(), magic, magic + 4);
    out.push_back(kFormatVersion);
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<std::uint8_t>(count >> (8 * i)));
    }
}

std::uint64_t check_header(std::span<const std::uint8_t> bytes, const char (&magic)[5]) {
    if (bytes.size() < kHeaderSize) {
        throw FormatError("file too short for a header");
    }
    if (!std::equal(magic, magic + 4, bytes.begin())) {
        throw FormatError(std::string("bad magic, expected ") + magic);
    }
    if (bytes[4] != kFormatVersion) {
        throw FormatError("unsupported format version " + std::to_string(bytes[4]));
    }
    std::uint64_t count = 0;
    for (int i = 0; i < 8; ++i) {
        count |= static_cast<std::uint64_t>(bytes[5 + i]) << (8 * i);
    }
    return count;
}

}  // namespace

std::vector<std::uint8_t> encode_bits(const BitBlock& bits) {
    std::vector<std::uint8_t> out;
    put_header(out, "SIQ1", bits.size());
    const auto payload = bits.to_bytes();
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

BitBlock decode_bits(std::span<const std::uint8_t> bytes) {
    const std::uint64_t count = check_header(bytes, "SIQ1");
    const auto payload = bytes.subspan(kHeaderSize);
    if (payload.size() != (count + 7) / 8) {
        throw FormatError("payload holds " + std::to_string(payload.size()) + " bytes, header promises " +
                          std::to_string(count) + " bits");
    }
    if (count % 8 != 0 && (payload.back() >> (count % 8)) != 0) {
        throw FormatError("non-zero pad bits");
    }
    return BitBlock::from_bytes(payload, count);
}

std::vector<std::uint8_t> encode_clicks(const ClickStream& clicks) {
    std::vector<std::uint8_t> out;
    put_header(out, "SIQC", clicks.size());
    out.insert(out.end(), clicks.codes().begin(), clicks.codes().end());
    return out;
}

ClickStream decode_clicks(std::span<const std::uint8_t> bytes) {
    const std::uint64_t count = check_header(bytes, "SIQC");
    const auto payload = bytes.subspan(kHeaderSize);
    if (payload.size() != count) {
        throw FormatError("click record count does not match header");
    }
    try {
        return ClickStream(std::vector<std::uint8_t>(payload.begin(), payload.end()));
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw FormatError("cannot create " + tmp.string());
        }
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp);
            throw FormatError("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

void write_bits_file(const std::filesystem::path& path, const BitBlock& bits) {
    write_file_atomic(path, encode_bits(bits));
}

BitBlock read_bits_file(const std::filesystem::path& path) { return decode_bits(read_file(path)); }

void write_clicks_file(const std::filesystem::path& path, const ClickStream& clicks) {
    write_file_atomic(path, encode_clicks(clicks));
}

ClickStream read_clicks_file(const std::filesystem::path& path) { return decode_clicks(read_file(path)); }

nlohmann::json read_json_file(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    try {
        return nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
    write_text_atomic(path, doc.dump(2) + "\n");
}

nlohmann::json to_json(const SessionTally& t) {
    return {
        {"n", t.n},
        {"n_x", t.n_x},
        {"n_z", t.n_z},
        {"x_minus", t.x_minus},
        {"x_double", t.x_double},
        {"z_double", t.z_double},
        {"double_click_seed_bits", t.seed_bits_consumed},
    };
}

SessionTally tally_from_json(const nlohmann::json& doc, BitBlock z_bits) {
    SessionTally t;
    try {
        t.n = doc.at("n").get<std::uint64_t>();
        t.n_x = doc.at("n_x").get<std::uint64_t>();
        t.n_z = doc.at("n_z").get<std::uint64_t>();
        t.x_minus = doc.at("x_minus").get<std::uint64_t>();
        t.x_double = doc.at("x_double").get<std::uint64_t>();
        t.z_double = doc.at("z_double").get<std::uint64_t>();
        t.seed_bits_consumed = doc.at("double_click_seed_bits").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("tally: ") + e.what());
    }
    t.z_bits = std::move(z_bits);
    if (!t.consistent()) {
        throw FormatError("tally counts are inconsistent with each other or with the Z bits");
    }
    return t;
}

nlohmann::json to_json(const EstimationResult& est) {
    return {
        {"n", est.n},
        {"n_x", est.n_x},
        {"e_bx", est.e_bx},
        {"theta", est.theta},
        {"log2_theta", est.theta > 0.0 ? nlohmann::json(std::log2(est.theta)) : nlohmann::json(nullptr)},
        {"eps_theta", std::exp2(est.log2_eps_theta)},
        {"log2_eps_theta", est.log2_eps_theta},
        {"e_pz_bound", est.e_pz_bound},
        {"abort", est.abort},
    };
}

EstimationResult estimation_from_json(const nlohmann::json& doc) {
    EstimationResult est;
    try {
        est.n = doc.at("n").get<std::uint64_t>();
        est.n_x = doc.at("n_x").get<std::uint64_t>();
        est.e_bx = doc.at("e_bx").get<double>();
        est.theta = doc.at("theta").get<double>();
        est.log2_eps_theta = doc.at("log2_eps_theta").get<double>();
        est.e_pz_bound = doc.at("e_pz_bound").get<double>();
        est.abort = doc.at("abort").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("estimation: ") + e.what());
    }
    return est;
}

nlohmann::json to_json(const SecurityReport& r) {
    return {
        {"eps_f", r.eps_f},
        {"log2_eps_f", r.log2_eps_f},
        {"eps_t", r.eps_t},
        {"log2_eps_t", r.log2_eps_t},
    };
}

nlohmann::json to_json(const TestReport& report) {
    nlohmann::json tests = nlohmann::json::array();
    for (const auto& t : report.tests) {
        tests.push_back({
            {"name", t.name},
            {"statistic", t.statistic},
            {"full_sequence_p_value", t.full_p_value},
            {"p_value", t.p_value},
            {"proportion_pass", t.proportion_pass},
            {"pass", t.pass},
        });
    }
    return {
        {"bits", report.bits},
        {"subsequences", report.subsequences},
        {"p_value_threshold", kPValueThreshold},
        {"proportion_threshold", kProportionThreshold},
        {"tests", tests},
        {"proportion_pass", report.proportion_pass},
        {"autocorrelation", report.autocorrelation},
        {"all_pass", report.all_pass},
    };
}

nlohmann::json abort_record(const std::string& stage, const std::string& reason, const EstimationResult* est) {
    nlohmann::json doc = {{"abort", true}, {"stage", stage}, {"reason", reason}};
    if (est != nullptr) {
        doc["estimation"] = to_json(*est);
    }
    return doc;
}

}  // namespace siqrng
