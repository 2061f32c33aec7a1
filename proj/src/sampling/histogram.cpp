#include "mmvs/sampling/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mmvs::sampling {

void DepthHistogram::check() const {
  if (counts.empty() || bin_edges.size() != counts.size() + 1) {
    throw std::invalid_argument("histogram needs B >= 1 counts and B + 1 edges");
  }
  for (std::size_t k = 1; k < bin_edges.size(); ++k) {
    if (!(bin_edges[k] > bin_edges[k - 1])) {
      throw std::invalid_argument("histogram bin edges must be strictly increasing");
    }
  }
  std::uint64_t sum = 0;
  for (auto c : counts) sum += c;
  if (sum != total) throw std::invalid_argument("histogram total does not equal the sum of counts");
}

HistogramAccumulator::HistogramAccumulator(std::size_t bins, double d_max)
    : d_max_(d_max), bin_width_(d_max / static_cast<double>(bins)), counts_(bins, 0) {
  if (bins < 2) throw std::invalid_argument("histogram needs at least 2 bins");
  if (!(d_max > 0.0) || !std::isfinite(d_max)) {
    throw std::invalid_argument("histogram d_max must be positive and finite");
  }
}

std::size_t HistogramAccumulator::bin_index(double depth) const {
  if (depth >= d_max_) return counts_.size() - 1;
  const auto k = static_cast<std::size_t>(std::floor(depth / bin_width_));
  return std::min(k, counts_.size() - 1);
}

void HistogramAccumulator::add(double depth) {
  if (!std::isfinite(depth) || depth <= 0.0) {
    ++skipped_;
    return;
  }
  ++counts_[bin_index(depth)];
  ++total_;
}

void HistogramAccumulator::add(std::span<const double> depths) {
  for (double d : depths) add(d);
}

void HistogramAccumulator::add(std::span<const float> depths) {
  for (float d : depths) add(static_cast<double>(d));
}

void HistogramAccumulator::merge(const HistogramAccumulator& other) {
  if (other.counts_.size() != counts_.size() || other.d_max_ != d_max_) {
    throw std::invalid_argument("cannot merge histograms with different binning");
  }
  for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
  total_ += other.total_;
  skipped_ += other.skipped_;
}

DepthHistogram HistogramAccumulator::finish() const {
  if (total_ == 0) {
    throw std::runtime_error("empty depth stream: no density can be formed (" +
                             std::to_string(skipped_) + " values skipped)");
  }
  DepthHistogram h;
  const auto bins = counts_.size();
  h.bin_edges.resize(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) {
    h.bin_edges[k] = d_max_ * static_cast<double>(k) / static_cast<double>(bins);
  }
  h.bin_edges.back() = d_max_;
  h.counts = counts_;
  h.total = total_;
  h.skipped = skipped_;
  return h;
}

DepthHistogram accumulate_histogram(std::span<const double> depth_values, std::size_t bins,
                                    double d_max) {
  HistogramAccumulator acc(bins, d_max);
  acc.add(depth_values);
  return acc.finish();
}

CumulativeDensity to_cdf(const DepthHistogram& h) {
  h.check();
  if (h.total == 0) throw std::invalid_argument("histogram is empty");
  CumulativeDensity c;
  c.origin = h.bin_edges.front();
  c.support.assign(h.bin_edges.begin() + 1, h.bin_edges.end());
  c.cdf.resize(h.counts.size());
  std::uint64_t running = 0;
  const auto n = static_cast<double>(h.total);
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    running += h.counts[k];
    c.cdf[k] = static_cast<double>(running) / n;
  }
  return c;
}

double CumulativeDensity::inverse(double theta) const {
  if (cdf.empty() || cdf.size() != support.size()) {
    throw std::invalid_argument("malformed cumulative density");
  }
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("quantile outside [0, 1]");
  std::size_t k = 0;
  if (theta <= 0.0) {
    // Start of the mass: left edge of the first non-empty bin.
    while (k < cdf.size() && cdf[k] <= 0.0) ++k;
    if (k == cdf.size()) throw std::runtime_error("degenerate cumulative density");
    return k == 0 ? origin : support[k - 1];
  }
  k = static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), theta) - cdf.begin());
  if (k == cdf.size()) return support.back();
  const double x0 = k == 0 ? origin : support[k - 1];
  const double c0 = k == 0 ? 0.0 : cdf[k - 1];
  const double x1 = support[k];
  const double c1 = cdf[k];
  if (!(c1 > c0)) return x1;
  return x0 + (theta - c0) / (c1 - c0) * (x1 - x0);
}

}  // namespace mmvs::sampling
