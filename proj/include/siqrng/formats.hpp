#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "siqrng/bitblock.hpp"
#include "siqrng/entropy_math.hpp"
#include "siqrng/estimation.hpp"
#include "siqrng/photonic_sim.hpp"
#include "siqrng/randtest.hpp"
#include "siqrng/squash_sample.hpp"

namespace siqrng {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint8_t kFormatVersion = 1;

/*
 * Packed-bit file: "SIQ1", version byte, bit count as 8 bytes little endian,
 * then ceil(count / 8) bytes with bit i at position i % 8 of byte i / 8.
 * Pad bits are zero.
 *
 * Click-record file: "SIQC", version byte, pulse count as 8 bytes little
 * endian, then one byte per pulse (bit 0 basis, bits 1-2 click pattern).
 */
std::vector<std::uint8_t> encode_bits(const BitBlock& bits);
BitBlock decode_bits(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_clicks(const ClickStream& clicks);
ClickStream decode_clicks(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
/// Write to a sibling temporary file, then rename it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

void write_bits_file(const std::filesystem::path& path, const BitBlock& bits);
BitBlock read_bits_file(const std::filesystem::path& path);
void write_clicks_file(const std::filesystem::path& path, const ClickStream& clicks);
ClickStream read_clicks_file(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

/// Counts only; the Z bits travel in a packed-bit file.
nlohmann::json to_json(const SessionTally& tally);
SessionTally tally_from_json(const nlohmann::json& doc, BitBlock z_bits);

nlohmann::json to_json(const EstimationResult& est);
EstimationResult estimation_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const SecurityReport& report);
nlohmann::json to_json(const TestReport& report);

/// Machine-readable record written when the protocol aborts.
nlohmann::json abort_record(const std::string& stage, const std::string& reason, const EstimationResult* est = nullptr);

}  // namespace siqrng
