#pragma once

#include <cstddef>

#include "mmvs/masks/depth_map.hpp"

namespace mmvs::evalkit {

/// Depth errors over pixels that are valid in the truth and have a positive
/// finite prediction.
///
///   l1_rel = mean |d - t| / t
///   l1_inv = mean |1/d - 1/t|
///   sc_inv = sqrt(mean z^2 - (mean z)^2),  z = ln d - ln t
struct MetricReport {
  double l1_rel = 0.0;
  double l1_inv = 0.0;
  double sc_inv = 0.0;
  std::size_t valid_pixel_count = 0;
  std::size_t excluded_nonpositive = 0;  // truth-valid pixels dropped for d <= 0
};

/// Throws when no pixel qualifies.
MetricReport compute_metrics(const masks::DepthMap& predicted, const masks::DepthMap& truth);

}  // namespace mmvs::evalkit
