#pragma once

#include <string>
#include <vector>

#include "mmvs/sampling/histogram.hpp"

namespace mmvs::sampling {

enum class SamplingScheme { kHistogram, kInverseDepth, kExplicit };

std::string to_string(SamplingScheme scheme);

/// Depths of the fronto-parallel sweep planes, strictly increasing.
struct PlaneSet {
  std::vector<double> depths;
  SamplingScheme scheme = SamplingScheme::kExplicit;

  std::size_t size() const { return depths.size(); }
  double front() const { return depths.front(); }
  double back() const { return depths.back(); }
  void check() const;
};

/// Builds an explicit plane set, validating monotonicity and positivity.
PlaneSet make_plane_set(std::vector<double> depths,
                        SamplingScheme scheme = SamplingScheme::kExplicit);

/// Quantiles theta_i = theta_min + (theta_max - theta_min) * i / D for
/// i in [0, D); theta_max itself is never sampled.
std::vector<double> plane_quantiles(std::size_t count, double theta_min, double theta_max);

/// Histogram-matched planes: depth_i = P^-1(theta_i).
PlaneSet sample_histogram_planes(const CumulativeDensity& cdf, std::size_t count,
                                 double theta_min = 0.1, double theta_max = 1.0);

/// Planes uniformly spaced in inverse depth between d_min and d_max, both
/// included. Returned ascending.
PlaneSet sample_inverse_depth_planes(double d_min, double d_max, std::size_t count);

}  // namespace mmvs::sampling
