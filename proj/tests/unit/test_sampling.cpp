#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mmvs/sampling/histogram.hpp"
#include "mmvs/sampling/persistence.hpp"
#include "mmvs/sampling/planes.hpp"

using namespace mmvs::sampling;

namespace {

// Independent binning oracle: half-open equal-width bins, last bin closed and
// absorbing everything above d_max.
std::vector<std::uint64_t> oracle_counts(const std::vector<double>& values, std::size_t bins, double d_max) {
  std::vector<std::uint64_t> counts(bins, 0);
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) continue;
    auto k = static_cast<std::size_t>(std::floor(v / (d_max / static_cast<double>(bins))));
    counts[std::min(k, bins - 1)]++;
  }
  return counts;
}

DepthHistogram uniform_histogram(std::size_t bins, double d_max, std::uint64_t per_bin) {
  DepthHistogram h;
  for (std::size_t k = 0; k <= bins; ++k) h.bin_edges.push_back(d_max * static_cast<double>(k) / bins);
  h.counts.assign(bins, per_bin);
  h.total = bins * per_bin;
  return h;
}

}  // namespace

TEST_CASE("histogram counts follow the half-open bin rule") {
  const std::vector<double> v{1, 1, 3};
  const auto h = accumulate_histogram(v, 4, 4.0);
  CHECK(h.counts == oracle_counts(v, 4, 4.0));
  CHECK(h.counts == std::vector<std::uint64_t>{0, 2, 0, 1});
  CHECK(h.total == 3);
}

TEST_CASE("a value on a bin edge falls in the upper bin") {
  const std::vector<double> v{5.0};
  const auto h = accumulate_histogram(v, 2, 10.0);
  CHECK(h.counts == std::vector<std::uint64_t>{0, 1});
}

TEST_CASE("values above d_max clamp into the last bin and invalid values are skipped") {
  const std::vector<double> v{12.0, 10.0, -1.0, 0.0, std::nan(""), INFINITY, 0.5};
  const auto h = accumulate_histogram(v, 4, 10.0);
  CHECK(h.counts == std::vector<std::uint64_t>{1, 0, 0, 2});
  CHECK(h.skipped == 4);
  CHECK(h.total == 3);
}

TEST_CASE("uniform draws fill every bin within five sigma") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(0.0, 10.0);
  std::vector<double> v(10000);
  for (auto& x : v) {
    do x = dist(rng);
    while (x == 0.0);
  }
  const auto h = accumulate_histogram(v, 200, 10.0);
  const double sigma = std::sqrt(10000.0 * (1.0 / 200) * (1.0 - 1.0 / 200));
  for (auto c : h.counts) CHECK(std::abs(static_cast<double>(c) - 50.0) <= 5.0 * sigma);
  CHECK(h.counts == oracle_counts(v, 200, 10.0));
}

TEST_CASE("histogram rejects bad arguments and empty streams") {
  CHECK_THROWS(HistogramAccumulator(1, 10.0));
  CHECK_THROWS(HistogramAccumulator(4, 0.0));
  const std::vector<double> none{-1.0};
  CHECK_THROWS(accumulate_histogram(none, 4, 10.0));
}

TEST_CASE("merging shards matches one pass and order does not matter") {
  std::mt19937_64 rng(5);
  std::exponential_distribution<double> dist(0.3);
  std::vector<double> v(5000);
  for (auto& x : v) x = dist(rng);
  const auto whole = accumulate_histogram(v, 200, 12.0);
  HistogramAccumulator a(200, 12.0), b(200, 12.0);
  a.add(std::span<const double>(v).first(1234));
  b.add(std::span<const double>(v).subspan(1234));
  a.merge(b);
  CHECK(a.finish().counts == whole.counts);
  auto shuffled = v;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(accumulate_histogram(shuffled, 200, 12.0).counts == whole.counts);
}

TEST_CASE("cdf is the normalised running sum at right edges") {
  DepthHistogram h = uniform_histogram(4, 4.0, 0);
  h.counts = {0, 2, 1, 0};
  h.total = 3;
  const auto c = to_cdf(h);
  REQUIRE(c.cdf.size() == 4);
  CHECK(c.cdf[0] == 0.0);
  CHECK(c.cdf[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(c.cdf[2] == 1.0);
  CHECK(c.cdf[3] == 1.0);
  CHECK(c.support == std::vector<double>{1, 2, 3, 4});

  h.counts = {3, 0, 0, 0};
  for (double v : to_cdf(h).cdf) CHECK(v == 1.0);

  const auto u = to_cdf(uniform_histogram(200, 10.0, 7));
  for (std::size_t k = 0; k < 200; ++k) CHECK(std::abs(u.cdf[k] - (k + 1) / 200.0) < 1e-12);
  CHECK(std::abs(u.cdf.back() - 1.0) < 1e-12);
}

TEST_CASE("histogram planes on a uniform density follow the analytic quantiles") {
  const auto planes = sample_histogram_planes(to_cdf(uniform_histogram(200, 10.0, 5)), 16, 0.1, 1.0);
  REQUIRE(planes.size() == 16);
  CHECK(planes.scheme == SamplingScheme::kHistogram);
  CHECK(planes.depths[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(planes.depths[15] == doctest::Approx(9.4375).epsilon(1e-12));
  for (std::size_t i = 1; i < 16; ++i) {
    CHECK(planes.depths[i] - planes.depths[i - 1] == doctest::Approx(0.5625).epsilon(1e-10));
  }

  // Brute-force empirical CDF from 10^6 draws agrees within one bin width.
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> dist(0.0, 10.0);
  std::vector<double> v(1000000);
  for (auto& x : v) {
    do x = dist(rng);
    while (x == 0.0);
  }
  const auto sampled = sample_histogram_planes(to_cdf(accumulate_histogram(v, 200, 10.0)), 16);
  for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(sampled.depths[i] - 10.0 * (0.1 + 0.9 * i / 16.0)) <= 0.05);
}

TEST_CASE("a point mass pulls every plane into its bin") {
  std::vector<double> v(100000, 2.0);
  for (int i = 1; i <= 20; ++i) v.push_back(0.5 * i);
  const auto h = accumulate_histogram(v, 200, 10.0);
  const auto planes = sample_histogram_planes(to_cdf(h), 16);
  for (double d : planes.depths) CHECK(std::abs(d - 2.0) <= 0.05);
  for (std::size_t i = 1; i < planes.size(); ++i) CHECK(planes.depths[i] > planes.depths[i - 1]);
}

TEST_CASE("a single histogram plane sits at the theta_min quantile") {
  const auto planes = sample_histogram_planes(to_cdf(uniform_histogram(200, 10.0, 5)), 1, 0.1, 1.0);
  REQUIRE(planes.size() == 1);
  CHECK(planes.depths[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("histogram sampling validates theta") {
  const auto c = to_cdf(uniform_histogram(10, 10.0, 1));
  CHECK_THROWS(sample_histogram_planes(c, 4, 0.5, 0.5));
  CHECK_THROWS(sample_histogram_planes(c, 4, -0.1, 1.0));
  CHECK_THROWS(sample_histogram_planes(c, 0, 0.1, 1.0));
}

TEST_CASE("quantile law holds within one bin of mass") {
  std::mt19937_64 rng(3);
  std::lognormal_distribution<double> dist(1.0, 0.6);
  std::vector<double> v(20000);
  for (auto& x : v) x = dist(rng);
  const double d_max = *std::max_element(v.begin(), v.end());
  const auto h = accumulate_histogram(v, 200, d_max);
  const auto planes = sample_histogram_planes(to_cdf(h), 16);
  const auto theta = plane_quantiles(16, 0.1, 1.0);
  double max_bin_mass = 0.0;
  for (auto c : h.counts) max_bin_mass = std::max(max_bin_mass, static_cast<double>(c) / v.size());
  for (std::size_t i = 0; i < 16; ++i) {
    const double frac =
        static_cast<double>(std::count_if(v.begin(), v.end(), [&](double x) { return x <= planes.depths[i]; })) /
        v.size();
    CHECK(std::abs(frac - theta[i]) <= max_bin_mass + 1e-12);
  }
}

TEST_CASE("inverse-depth planes") {
  SUBCASE("paper range hits both endpoints exactly") {
    const auto p = sample_inverse_depth_planes(0.5, 50.0, 16);
    REQUIRE(p.size() == 16);
    CHECK(p.depths.front() == 0.5);
    CHECK(p.depths.back() == 50.0);
    for (std::size_t i = 2; i < 16; ++i) {
      const double a = 1.0 / p.depths[i - 2] - 1.0 / p.depths[i - 1];
      const double b = 1.0 / p.depths[i - 1] - 1.0 / p.depths[i];
      CHECK(std::abs(a - b) < 1e-12);
    }
  }
  SUBCASE("three planes from the direct formula") {
    const auto p = sample_inverse_depth_planes(1.0, 3.0, 3);
    // 1/d_i = (1 - 1/3) i / 2 + 1/3 for i = 0, 1, 2
    std::vector<double> expected;
    for (int i = 2; i >= 0; --i) expected.push_back(1.0 / ((1.0 - 1.0 / 3.0) * i / 2.0 + 1.0 / 3.0));
    for (std::size_t i = 0; i < 3; ++i) CHECK(p.depths[i] == doctest::Approx(expected[i]).epsilon(1e-15));
    CHECK(p.depths[1] == doctest::Approx(1.5).epsilon(1e-15));
  }
  SUBCASE("two planes are exactly the endpoints") {
    const auto p = sample_inverse_depth_planes(0.7, 3.3, 2);
    CHECK(p.depths == std::vector<double>{0.7, 3.3});
  }
  SUBCASE("preconditions") {
    CHECK_THROWS(sample_inverse_depth_planes(3.0, 3.0, 4));
    CHECK_THROWS(sample_inverse_depth_planes(5.0, 3.0, 4));
    CHECK_THROWS(sample_inverse_depth_planes(1.0, 3.0, 1));
    CHECK_THROWS(sample_inverse_depth_planes(0.0, 3.0, 4));
  }
}

TEST_CASE("samplers are deterministic") {
  const auto c = to_cdf(uniform_histogram(50, 5.0, 3));
  CHECK(sample_histogram_planes(c, 16).depths == sample_histogram_planes(c, 16).depths);
  CHECK(sample_inverse_depth_planes(0.5, 50, 16).depths == sample_inverse_depth_planes(0.5, 50, 16).depths);
}

TEST_CASE("plane sets must be strictly increasing and positive") {
  CHECK_THROWS(make_plane_set({1.0, 1.0}));
  CHECK_THROWS(make_plane_set({2.0, 1.0}));
  CHECK_THROWS(make_plane_set({0.0, 1.0}));
  CHECK_THROWS(make_plane_set({}));
  CHECK_NOTHROW(make_plane_set({0.5}));
}

TEST_CASE("histogram record round-trips with the documented layout") {
  std::vector<double> v{0.3, 1.2, 1.9, 7.5};
  const auto h = accumulate_histogram(v, 4, 8.0);
  const auto bytes = encode_histogram(h);
  REQUIRE(bytes.size() == 4 + 1 + 4 + 8 + 4 * 8);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "DHST");
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 4);
  CHECK(bytes[6] == 0);
  const auto back = decode_histogram(bytes);
  CHECK(back.counts == h.counts);
  CHECK(back.bin_edges == h.bin_edges);
  CHECK(back.total == h.total);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS(decode_histogram(bad));
  bad = bytes;
  bad.pop_back();
  CHECK_THROWS(decode_histogram(bad));
}

TEST_CASE("plane text round-trips bit-exactly") {
  const auto p = sample_inverse_depth_planes(0.5, 50.0, 16);
  const auto text = format_planes(p);
  CHECK(std::count(text.begin(), text.end(), '\n') == 16);
  CHECK(parse_planes(text).depths == p.depths);
  CHECK_THROWS(parse_planes("1.0\nabc\n"));
  CHECK_THROWS(parse_planes("2.0\n1.0\n"));
}
