#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "trackforge/nn.hpp"

namespace trackforge {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary network container: magic, version, layer sizes, activation tag and
// gains, then every tensor as row-major little-endian float64 (weights then
// bias per layer, then log_std), then an FNV-1a 64 checksum of all
// preceding bytes.
std::string serialize_params(const MlpParams& params);
MlpParams parse_params(const std::string& bytes, const std::string& origin = "<checkpoint>");
void save_params(const MlpParams& params, const std::filesystem::path& path);
MlpParams load_params(const std::filesystem::path& path);

std::string serialize_adam(const AdamState& state);
AdamState parse_adam(const std::string& bytes, const std::string& origin = "<adam>");
void save_adam(const AdamState& state, const std::filesystem::path& path);
AdamState load_adam(const std::filesystem::path& path);

std::uint64_t fnv1a64(const void* data, std::size_t size);

std::string read_file(const std::filesystem::path& path);
// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace trackforge
