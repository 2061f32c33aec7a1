#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mmvs::sampling {

inline constexpr std::size_t kDefaultBins = 200;

/// Equal-width depth histogram over [0, d_max].
///
/// Bins are half-open [edge_k, edge_k+1) except the last, which is closed and
/// also absorbs every value above d_max.
struct DepthHistogram {
  std::vector<double> bin_edges;      // B + 1 ascending edges, edge_0 = 0
  std::vector<std::uint64_t> counts;  // B counts
  std::uint64_t total = 0;            // sum of counts
  std::uint64_t skipped = 0;          // non-finite or non-positive inputs

  std::size_t bins() const { return counts.size(); }
  double d_max() const { return bin_edges.back(); }
  void check() const;
};

/// Streaming builder. Partial accumulators over disjoint shards merge by
/// count addition and give the same result as one sequential pass.
class HistogramAccumulator {
 public:
  HistogramAccumulator(std::size_t bins, double d_max);

  void add(double depth);
  void add(std::span<const double> depths);
  void add(std::span<const float> depths);
  void merge(const HistogramAccumulator& other);

  std::size_t bin_index(double depth) const;
  /// Throws when no valid value was accumulated.
  DepthHistogram finish() const;

 private:
  double d_max_;
  double bin_width_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  std::uint64_t skipped_ = 0;
};

/// One-shot histogram of a depth stream. Throws on an empty (all-skipped) stream.
DepthHistogram accumulate_histogram(std::span<const double> depth_values, std::size_t bins,
                                    double d_max);

/// Normalised cumulative histogram sampled at bin right edges.
struct CumulativeDensity {
  double origin = 0.0;          // left edge of the first bin, where the CDF is 0
  std::vector<double> support;  // right edges, ascending
  std::vector<double> cdf;      // non-decreasing, cdf.back() == 1

  /// Piecewise-linear inverse through (origin, 0), (support[k], cdf[k]).
  double inverse(double theta) const;
};

CumulativeDensity to_cdf(const DepthHistogram& h);

}  // namespace mmvs::sampling
