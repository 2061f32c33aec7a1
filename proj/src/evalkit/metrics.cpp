#include "mmvs/evalkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mmvs::evalkit {

MetricReport compute_metrics(const masks::DepthMap& predicted, const masks::DepthMap& truth) {
  truth.check();
  if (predicted.height != truth.height || predicted.width != truth.width ||
      predicted.values.size() != truth.values.size()) {
    throw std::invalid_argument("predicted and ground-truth depth maps differ in shape");
  }
  MetricReport r;
  double rel = 0.0, inv = 0.0;
  std::vector<double> z;
  z.reserve(truth.values.size());
  for (std::size_t i = 0; i < truth.values.size(); ++i) {
    if (!truth.valid(i)) continue;
    const double d = predicted.values[i];
    if (!(d > 0.0) || !std::isfinite(d)) {
      ++r.excluded_nonpositive;
      continue;
    }
    const double t = truth.values[i];
    rel += std::abs(d - t) / t;
    inv += std::abs(1.0 / d - 1.0 / t);
    z.push_back(std::log(d) - std::log(t));
    ++r.valid_pixel_count;
  }
  if (r.valid_pixel_count == 0) throw std::runtime_error("no valid pixels to evaluate");
  const auto n = static_cast<double>(r.valid_pixel_count);
  r.l1_rel = rel / n;
  r.l1_inv = inv / n;
  double z_mean = 0.0;
  for (double v : z) z_mean += v;
  z_mean /= n;
  double var = 0.0;
  for (double v : z) var += (v - z_mean) * (v - z_mean);
  r.sc_inv = std::sqrt(std::max(0.0, var / n));
  return r;
}

}  // namespace mmvs::evalkit
