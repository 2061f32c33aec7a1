#include "mmvs/sampling/planes.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mmvs::sampling {

std::string to_string(SamplingScheme scheme) {
  switch (scheme) {
    case SamplingScheme::kHistogram:
      return "histogram";
    case SamplingScheme::kInverseDepth:
      return "inverse_depth";
    case SamplingScheme::kExplicit:
      return "explicit";
  }
  return "unknown";
}

void PlaneSet::check() const {
  if (depths.empty()) throw std::invalid_argument("plane set is empty");
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (!std::isfinite(depths[i]) || depths[i] <= 0.0) {
      throw std::invalid_argument("plane depths must be positive and finite");
    }
    if (i > 0 && !(depths[i] > depths[i - 1])) {
      throw std::invalid_argument("plane depths must be strictly increasing");
    }
  }
}

PlaneSet make_plane_set(std::vector<double> depths, SamplingScheme scheme) {
  PlaneSet p{std::move(depths), scheme};
  p.check();
  return p;
}

std::vector<double> plane_quantiles(std::size_t count, double theta_min, double theta_max) {
  if (count < 1) throw std::invalid_argument("need at least one plane");
  if (!(theta_min >= 0.0 && theta_min < theta_max && theta_max <= 1.0)) {
    throw std::invalid_argument("quantile range must satisfy 0 <= theta_min < theta_max <= 1");
  }
  std::vector<double> theta(count);
  const double span = theta_max - theta_min;
  for (std::size_t i = 0; i < count; ++i) {
    theta[i] = theta_min + span * static_cast<double>(i) / static_cast<double>(count);
  }
  return theta;
}

PlaneSet sample_histogram_planes(const CumulativeDensity& cdf, std::size_t count,
                                 double theta_min, double theta_max) {
  const auto theta = plane_quantiles(count, theta_min, theta_max);
  PlaneSet planes;
  planes.scheme = SamplingScheme::kHistogram;
  planes.depths.reserve(count);
  for (double t : theta) {
    double d = cdf.inverse(t);
    if (!(d > 0.0)) {
      throw std::runtime_error("degenerate cumulative density: quantile " + std::to_string(t) +
                               " maps to a non-positive depth");
    }
    if (!planes.depths.empty() && d <= planes.depths.back()) {
      d = std::nextafter(planes.depths.back(), std::numeric_limits<double>::infinity());
    }
    planes.depths.push_back(d);
  }
  return planes;
}

PlaneSet sample_inverse_depth_planes(double d_min, double d_max, std::size_t count) {
  if (!(d_min > 0.0) || !(d_min < d_max) || !std::isfinite(d_max)) {
    throw std::invalid_argument("inverse-depth sampling needs 0 < d_min < d_max");
  }
  if (count < 2) throw std::invalid_argument("inverse-depth sampling needs at least 2 planes");
  const double inv_near = 1.0 / d_min;
  const double inv_far = 1.0 / d_max;
  PlaneSet planes;
  planes.scheme = SamplingScheme::kInverseDepth;
  planes.depths.resize(count);
  // Index i runs far to near; store ascending.
  for (std::size_t i = 0; i < count; ++i) {
    const double inv =
        (inv_near - inv_far) * static_cast<double>(i) / static_cast<double>(count - 1) + inv_far;
    planes.depths[count - 1 - i] = 1.0 / inv;
  }
  planes.depths.front() = d_min;
  planes.depths.back() = d_max;
  planes.check();
  return planes;
}

}  // namespace mmvs::sampling
