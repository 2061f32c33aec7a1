#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mmvs/evalkit/dataset.hpp"
#include "mmvs/io/ppm.hpp"
#include "mmvs/io/tensor_file.hpp"

namespace mmvs::evalkit {

// A sample directory holds:
//   reference.ppm, neighbour_<k>.ppm   binary PPM (P6, maxval 255)
//   poses.txt       one row per neighbour: r00 r01 r02 t0 r10 r11 r12 t1 r20 r21 r22 t2
//   intrinsics.txt  one row: fx fy cx cy
//   depth.mmvs      tensor file [H, W], NaN where ground truth is missing
inline constexpr const char* kReferenceFile = "reference.ppm";
inline constexpr const char* kPosesFile = "poses.txt";
inline constexpr const char* kIntrinsicsFile = "intrinsics.txt";
inline constexpr const char* kDepthFile = "depth.mmvs";
inline constexpr const char* kManifestFile = "manifest.txt";

std::string neighbour_file_name(std::size_t k);

io::Rgb8Image to_rgb8(const geometry::ImageBuffer& image);
geometry::ImageBuffer from_rgb8(const io::Rgb8Image& image);

io::TensorFile depth_to_tensor(const masks::DepthMap& depth);
masks::DepthMap depth_from_tensor(const io::TensorFile& tensor);

std::string format_pose(const geometry::RelativePose& pose);
geometry::RelativePose parse_pose(const std::string& row);
std::vector<geometry::RelativePose> read_poses(const std::filesystem::path& path);

void write_sample(const std::filesystem::path& dir, const Sample& sample);
/// Loads images quantised to 8 bits. Throws if a neighbour image has no pose row.
Sample read_sample(const std::filesystem::path& dir);

/// Dataset manifest: one "<sample id>\t<seed>" row per sample directory.
struct ManifestEntry {
  std::string id;
  std::uint64_t seed = 0;
};
void write_manifest(const std::filesystem::path& root, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& root);

/// Reads every sample listed in the manifest under `root`.
std::vector<Sample> read_dataset(const std::filesystem::path& root);

}  // namespace mmvs::evalkit
