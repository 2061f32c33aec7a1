#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mmvs/sampling/histogram.hpp"
#include "mmvs/sampling/planes.hpp"

namespace mmvs::sampling {

// Histogram record: "DHST", version byte 1, u32 bin count, f64 d_max, then
// bin-count u64 counts. All little-endian. The skipped counter is not stored.
std::vector<std::uint8_t> encode_histogram(const DepthHistogram& h);
DepthHistogram decode_histogram(std::span<const std::uint8_t> bytes);
void write_histogram(const std::filesystem::path& path, const DepthHistogram& h);
DepthHistogram read_histogram(const std::filesystem::path& path);

// Plane list: one decimal depth per line, ascending, printed with enough
// digits to round-trip. Read-back sets the scheme to kExplicit.
std::string format_planes(const PlaneSet& planes);
PlaneSet parse_planes(const std::string& text);
void write_planes(const std::filesystem::path& path, const PlaneSet& planes);
PlaneSet read_planes(const std::filesystem::path& path);

}  // namespace mmvs::sampling
