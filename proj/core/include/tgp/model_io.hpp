#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "tgp/methods.hpp"

namespace tgp {

// Model file layout:
//
//   8 bytes   magic "TGPMODEL"
//   1 byte    format version
//   sections  4-byte tag, u64 payload length, payload
//     METH    method configuration
//     NORM    normalization statistics
//     EXGP | SVGP | TWOS   fitted body
//
// All numbers are little-endian; doubles are raw IEEE-754 bits, so a
// load/save cycle reproduces the file byte for byte.
inline constexpr std::string_view kModelMagic = "TGPMODEL";
inline constexpr std::uint8_t kModelVersion = 1;

std::string serialize_model(const TerrainModel& model);
TerrainModel deserialize_model(std::string_view bytes);

void save_model(const TerrainModel& model, const std::filesystem::path& path);
TerrainModel load_model(const std::filesystem::path& path);

}  // namespace tgp
