#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "flowvs/observation.hpp"

namespace flowvs {

using Bytes = std::vector<std::uint8_t>;

inline constexpr float kFloMagic = 202021.25f;
/// Middlebury convention: components with |value| > 1e9 mark unknown flow.
inline constexpr float kFloUnknownThreshold = 1e9f;
inline constexpr float kFloUnknownValue = 1e10f;

/// Middlebury .flo: float32 magic, int32 width, int32 height, then row-major
/// interleaved (u, v) float32, all little-endian. Throws FormatError.
FlowField read_flo(std::span<const std::uint8_t> bytes);
/// Invalid nodes are written as kFloUnknownValue.
Bytes write_flo(const FlowField& flow);

/// Grayscale PFM ("Pf"). Negative scale means little-endian; rows are stored
/// bottom-to-top. Non-positive or non-finite samples become invalid nodes but
/// keep their stored value. Throws UnsupportedFormat for color ("PF") files
/// and FormatError for anything malformed.
DepthMap read_pfm(std::span<const std::uint8_t> bytes);
/// Always writes little-endian with scale -1.0.
Bytes write_pfm(const DepthMap& depth);

/// Throws IoError.
Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace flowvs
