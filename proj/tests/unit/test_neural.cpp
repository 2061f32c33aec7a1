#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "../support/gradcheck.hpp"
#include "../support/gradient_suite.hpp"
#include "mmvs/evalkit/dataset.hpp"
#include "mmvs/masks/multiplane_mask.hpp"
#include "mmvs/neural/adam.hpp"
#include "mmvs/neural/checkpoint.hpp"
#include "mmvs/neural/convert.hpp"
#include "mmvs/neural/dispnet.hpp"
#include "mmvs/neural/losses.hpp"
#include "mmvs/neural/masknet.hpp"
#include "mmvs/neural/training.hpp"
#include "mmvs/sampling/planes.hpp"

using namespace mmvs;
using namespace mmvs::nn;
using mmvs::testing::random_tensor;
using mmvs::testing::TensorD;

namespace {

template <typename T>
void randomize(ParameterStore<T>& store, std::uint64_t seed, double bound) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-bound, bound);
  for (const auto& p : store.parameters()) {
    auto t = p.tensor;
    for (auto& v : t.mutable_values()) v = static_cast<T>(u(rng));
  }
}

template <typename T>
Tensor<T> uniform_input(Shape shape, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<T> v(shape_numel(shape));
  for (auto& x : v) x = static_cast<T>(u(rng));
  return Tensor<T>(std::move(shape), std::move(v));
}

NetworkConfig small_config(std::size_t planes, std::size_t h, std::size_t w, std::size_t base = 4) {
  NetworkConfig c;
  c.planes = planes;
  c.input_height = h;
  c.input_width = w;
  c.base_channels = base;
  return c;
}

masks::MultiplaneMask constant_mask(std::size_t d, std::size_t h, std::size_t w, float v) {
  masks::MultiplaneMask m;
  m.planes = d;
  m.height = h;
  m.width = w;
  m.values.assign(d * h * w, v);
  return m;
}

std::vector<PreparedSample> tiny_dataset(std::size_t count, const sampling::PlaneSet& planes) {
  const auto cam = evalkit::default_camera(32, 24);
  const auto data = evalkit::generate_dataset(5, count, cam, evalkit::SceneOptions{}, evalkit::MotionProfile{});
  std::vector<PreparedSample> out;
  for (const auto& s : data) {
    std::vector<geometry::ImageBuffer> images;
    std::vector<geometry::RelativePose> poses;
    for (const auto& n : s.neighbours) {
      images.push_back(n.image);
      poses.push_back(n.pose);
    }
    out.push_back(prepare_sample(s.id, cam, s.reference, images, poses, s.truth, planes));
  }
  return out;
}

}  // namespace

TEST_CASE("every differentiable op passes a finite-difference check") {
  for (const auto& c : mmvs::testing::run_gradient_suite(2024, 3)) {
    INFO(c.op << " worst relative error " << c.worst_relative_error);
    CHECK(c.passed());
  }
}

TEST_CASE("conv gradient on a 1x2x6x6 input") {
  std::mt19937_64 rng(3);
  std::vector<TensorD> in{random_tensor(rng, {1, 2, 6, 6}, -1, 1, true), random_tensor(rng, {3, 2, 3, 3}, -1, 1, true),
                          random_tensor(rng, {3}, -1, 1, true)};
  const auto r = mmvs::testing::gradient_check(
      [](std::vector<TensorD>& t) { return mmvs::testing::weighted_sum(conv2d(t[0], t[1], t[2], 1, 1), 9); }, in);
  CHECK(r.relative_error() < 1e-4);
}

TEST_CASE("backward of a sum of squares") {
  TensorD x({2}, {1.0, 2.0}, true);
  backward(sum(mul(x, x)));
  REQUIRE(x.has_grad());
  CHECK(x.grad()[0] == 2.0);
  CHECK(x.grad()[1] == 4.0);
}

TEST_CASE("backward rejects tensors outside a recorded graph") {
  TensorD x({2}, {1.0, 2.0}, true);
  const auto y = sum(mul(x, x));
  CHECK_THROWS_AS(backward(y.detach()), std::logic_error);
  CHECK_THROWS_AS(backward(x), std::logic_error);
  {
    NoGradGuard guard;
    CHECK_THROWS_AS(backward(sum(mul(x, x))), std::logic_error);
  }
  CHECK_THROWS_AS(backward(mul(x, x)), std::logic_error);
}

TEST_CASE("MaskNet output shapes and initial value") {
  const auto cfg = small_config(16, 48, 64, 8);
  MaskNet<float> net(cfg);
  const auto outs = net.forward(Tensor<float>::zeros({1, 51, 48, 64}), false);
  REQUIRE(outs.size() == 4);
  const std::vector<std::pair<std::size_t, std::size_t>> extents{{6, 8}, {12, 16}, {24, 32}, {48, 64}};
  for (std::size_t s = 0; s < 4; ++s) {
    CHECK(outs[s].shape() == Shape{1, 16, extents[s].first, extents[s].second});
    for (float v : outs[s].values()) REQUIRE(v == 0.5f);
  }
  CHECK_THROWS_WITH_AS(net.forward(Tensor<float>::zeros({1, 50, 48, 64}), false), doctest::Contains("D=16"),
                       std::invalid_argument);
}

TEST_CASE("MaskNet outputs lie strictly inside (0, 1)") {
  const auto cfg = small_config(3, 24, 32);
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    MaskNet<float> net(cfg);
    randomize(net.store(), trial, 0.3);
    for (bool training : {false, true}) {
      for (const auto& o : net.forward(uniform_input<float>({2, 12, 24, 32}, trial + 100), training)) {
        for (float v : o.values()) REQUIRE((v > 0.0f && v < 1.0f));
      }
    }
  }
}

TEST_CASE("fusing two neighbours equals the element-wise mean") {
  const auto cfg = small_config(4, 24, 32);
  MaskNet<float> net(cfg);
  randomize(net.store(), 8, 0.3);
  auto data = tiny_dataset(1, sampling::sample_inverse_depth_planes(1.0, 10.0, 4));
  const auto& vols = data[0].volumes;
  REQUIRE(vols.size() == 2);
  NoGradGuard guard;
  const auto out = net.forward(stack_volumes<float>(vols), false).back();
  const std::vector<masks::MultiplaneMask> each{mask_from_tensor(out, 0), mask_from_tensor(out, 1)};
  CHECK(each[0].values != each[1].values);
  const auto expected = masks::fuse_masks(each);
  const auto fused = predict_fused_masks(net, vols);
  REQUIRE(fused.values.size() == expected.values.size());
  for (std::size_t i = 0; i < fused.values.size(); ++i) CHECK(fused.values[i] == doctest::Approx(expected.values[i]));
}

TEST_CASE("identical neighbours receive identical gradients through the fusion") {
  const auto cfg = small_config(2, 16, 16, 2);
  MaskNet<double> net(cfg);
  randomize(net.store(), 4, 0.4);
  const auto one = uniform_input<double>({1, 9, 16, 16}, 6);
  std::vector<double> both(one.values().begin(), one.values().end());
  both.insert(both.end(), one.values().begin(), one.values().end());
  TensorD volume({2, 9, 16, 16}, both, true);
  const std::array<std::size_t, 1> groups{2};
  const auto fused = group_mean(net.forward(volume, true).back(), std::span<const std::size_t>(groups));
  backward(mmvs::testing::weighted_sum(fused, 17));
  const auto g = volume.grad();
  const std::size_t half = g.size() / 2;
  double scale = 0.0;
  for (double v : g) scale = std::max(scale, std::abs(v));
  REQUIRE(scale > 0.0);
  for (std::size_t i = 0; i < half; ++i) REQUIRE(std::abs(g[i] - g[i + half]) <= 1e-12 * scale);
}

TEST_CASE("shifting the input by the total stride shifts the finest masks") {
  const auto cfg = small_config(1, 32, 512, 2);
  MaskNet<float> net(cfg);
  randomize(net.store(), 12, 0.3);
  const std::size_t shift = 32, h = 32, w = 512, c = 6;
  const auto base = uniform_input<float>({1, c, h, w}, 1);
  const auto fresh = uniform_input<float>({1, c, h, w}, 2);
  std::vector<float> moved(base.values().begin(), base.values().end());
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const auto i = (ch * h + y) * w + x;
        moved[i] = x >= shift ? base.values()[i - shift] : fresh.values()[i];
      }
    }
  }
  NoGradGuard guard;
  const auto a = net.forward(base, false).back();
  const auto b = net.forward(Tensor<float>({1, c, h, w}, moved), false).back();
  const std::size_t margin = 192;
  double worst = 0.0;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = margin; x + margin + shift < w; ++x) {
      worst = std::max(worst, static_cast<double>(std::abs(a.values()[y * w + x] - b.values()[y * w + x + shift])));
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("DispNet output shapes on a 64x64 input") {
  const auto cfg = small_config(16, 64, 64, 8);
  DispNet<float> net(cfg);
  const auto outs = net.forward(uniform_input<float>({1, 19, 64, 64}, 3), false);
  REQUIRE(outs.size() == 6);
  std::size_t side = 2;
  for (const auto& o : outs) {
    CHECK(o.shape() == Shape{1, 1, side, side});
    for (float v : o.values()) CHECK(v >= 0.0f);
    side *= 2;
  }
  CHECK_THROWS_AS(net.forward(uniform_input<float>({1, 18, 64, 64}, 3), false), std::invalid_argument);
}

TEST_CASE("DispNet outputs are never negative over random weights") {
  auto cfg = small_config(2, 16, 16, 2);
  std::mt19937_64 rng(99);
  std::size_t negatives = 0;
  for (std::uint64_t trial = 0; trial < 1000; ++trial) {
    cfg.seed = trial + 1;
    DispNet<float> net(cfg);
    randomize(net.store(), trial, 1.0);
    NoGradGuard guard;
    for (const auto& o : net.forward(uniform_input<float>({2, 5, 16, 16}, rng(), -2.0, 2.0), trial % 2 == 0)) {
      for (float v : o.values()) negatives += v < 0.0f;
    }
  }
  CHECK(negatives == 0);
}

TEST_CASE("DispNet responds to its mask channels") {
  const auto cfg = small_config(4, 32, 32);
  DispNet<float> net(cfg);
  const auto x = uniform_input<float>({1, 7, 32, 32}, 5);
  std::vector<float> doubled(x.values().begin(), x.values().end());
  for (std::size_t i = 3 * 32 * 32; i < doubled.size(); ++i) doubled[i] *= 2.0f;
  NoGradGuard guard;
  const auto a = net.forward(x, false).back();
  const auto b = net.forward(Tensor<float>(x.shape(), doubled), false).back();
  CHECK(std::vector<float>(a.values().begin(), a.values().end()) !=
        std::vector<float>(b.values().begin(), b.values().end()));
}

TEST_CASE("binary cross-entropy examples") {
  auto truth = constant_mask(3, 2, 2, 0.0f);
  truth.values[1] = truth.values[5] = 1.0f;
  CHECK(bce_mask_loss(constant_mask(3, 2, 2, 0.5f), truth) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(bce_mask_loss(truth, truth) <= 1e-6);

  auto one = constant_mask(1, 1, 1, 1.0f);
  CHECK(bce_mask_loss(constant_mask(1, 1, 1, 0.9f), one) == doctest::Approx(-std::log(0.9)).epsilon(1e-6));

  truth.validity.assign(4, 0);
  CHECK_THROWS(bce_mask_loss(truth, truth));
  CHECK_THROWS(bce_mask_loss(constant_mask(2, 2, 2, 0.5f), constant_mask(3, 2, 2, 0.0f)));
}

TEST_CASE("multi-scale L1 examples") {
  InverseDepthTarget unit{1, 2, 2, std::vector<float>(4, 1.0f), std::vector<std::uint8_t>(4, 1)};
  const std::array<double, 1> w1{1.0};
  auto one = multiscale_l1_loss<double>({TensorD::full({1, 1, 2, 2}, 0.75)}, std::span(&unit, 1), w1);
  CHECK(one.total.item() == doctest::Approx(0.25).epsilon(1e-12));
  one = multiscale_l1_loss<double>({TensorD::full({1, 1, 2, 2}, 1.0)}, std::span(&unit, 1), w1);
  CHECK(one.total.item() == 0.0);

  std::vector<InverseDepthTarget> targets;
  std::vector<TensorD> outs;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  for (std::size_t side = 1; side <= 32; side *= 2) {
    InverseDepthTarget t{1, side, side, std::vector<float>(side * side), std::vector<std::uint8_t>(side * side, 1)};
    std::vector<double> p(side * side);
    for (std::size_t i = 0; i < p.size(); ++i) {
      t.values[i] = static_cast<float>(u(rng));
      p[i] = t.values[i] + ((i % 2) ? 0.1 : -0.1);
    }
    targets.push_back(t);
    outs.emplace_back(Shape{1, 1, side, side}, p);
  }
  const NetworkConfig cfg;
  const auto six = multiscale_l1_loss<double>(outs, targets, cfg.loss_weights);
  CHECK(six.total.item() == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(six.per_scale.size() == 6);

  targets.back().valid.assign(targets.back().valid.size(), 0);
  CHECK_THROWS(multiscale_l1_loss<double>(outs, targets, cfg.loss_weights));
}

TEST_CASE("untrained MaskNet pyramid loss is ln 2") {
  const auto planes = sampling::sample_inverse_depth_planes(1.0, 10.0, 4);
  const auto data = tiny_dataset(2, planes);
  MaskNet<float> net(small_config(4, 24, 32));
  std::vector<geometry::WarpVolume> vols;
  std::vector<std::size_t> groups;
  std::vector<std::vector<MaskTarget>> per_scale(4);
  for (const auto& s : data) {
    vols.insert(vols.end(), s.volumes.begin(), s.volumes.end());
    groups.push_back(s.volumes.size());
    for (std::size_t k = 0; k < 4; ++k) per_scale[k].push_back(s.mask_targets[k]);
  }
  std::vector<MaskTarget> targets;
  for (const auto& t : per_scale) targets.push_back(stack_targets(std::span<const MaskTarget>(t)));
  const auto loss = mask_pyramid_loss<float>(net.forward(stack_volumes<float>(vols), true), groups, targets);
  CHECK(loss.total.item() == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  for (double v : loss.per_scale) CHECK(v == doctest::Approx(std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("target pooling") {
  masks::DepthMap d = masks::DepthMap::filled(2, 4, 2.0);
  d.values = {1, 1, 5, 5, 1, 3, 5, 5};
  d.validity[7] = 0;
  const auto planes = sampling::make_plane_set({1.5, 4.0});
  const auto m = pool_mask_target(d, planes, {1, 2});
  CHECK(m.valid == std::vector<std::uint8_t>{1, 1});
  // left cell {1,1,1,3}: plane 1.5 has 3 of 4 in front, plane 4 has all
  CHECK(m.masks == std::vector<float>{1, 0, 1, 0});
  const auto inv = pool_inverse_depth_target(d, {1, 2});
  CHECK(inv.values[0] == doctest::Approx((3.0 + 1.0 / 3.0) / 4.0));
  CHECK(inv.values[1] == doctest::Approx(0.2));

  d.validity = {1, 1, 0, 0, 1, 1, 0, 0};
  const auto holes = pool_inverse_depth_target(d, {1, 2});
  CHECK(holes.valid == std::vector<std::uint8_t>{1, 0});
  CHECK_THROWS(pool_mask_target(d, planes, {4, 4}));

  // odd sizes: cells overlap rather than drop pixels
  const auto odd = pool_inverse_depth_target(masks::DepthMap::filled(3, 5, 4.0), {2, 3});
  for (float v : odd.values) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("Adam first step moves each weight by the learning rate") {
  AdamConfig cfg;
  std::vector<double> p{1.0, -2.0, 0.5}, g{0.3, -4.0, 0.05}, m(3, 0.0), v(3, 0.0);
  adam_update<double>(p, g, m, v, 1, cfg);
  const std::vector<double> expected{1.0 - cfg.lr, -2.0 + cfg.lr, 0.5 - cfg.lr};
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(p[i] - expected[i]) <= 1e-6 * cfg.lr + 1e-12);

  std::vector<double> z(3, 0.0), zm{0.1, 0.2, 0.3}, zv{0.01, 0.02, 0.03};
  const auto before = p;
  adam_update<double>(p, z, zm, zv, 2, cfg);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(zm[i] == doctest::Approx(0.9 * 0.1 * (i + 1)));
    CHECK(zv[i] == doctest::Approx(0.999 * 0.01 * (i + 1)));
  }
  for (std::size_t i = 0; i < 3; ++i) CHECK(p[i] != before[i]);
  CHECK_THROWS(adam_update<double>(p, z, zm, zv, 0, cfg));
}

TEST_CASE("Adam leaves a weight with zero gradient history untouched") {
  AdamConfig cfg;
  std::vector<double> p{1.5}, g{0.0}, m{0.0}, v{0.0};
  for (std::uint64_t step = 1; step <= 5; ++step) adam_update<double>(p, g, m, v, step, cfg);
  CHECK(p[0] == 1.5);
}

TEST_CASE("Adam trajectories are deterministic and fail fast") {
  ParameterStore<double> store;
  auto a = store.add_parameter("a", {2}, {0.5, -0.5});
  auto b = store.add_parameter("b", {2}, {0.5, -0.5});
  auto state = make_adam_state<double>(AdamConfig{}, store.parameters());
  for (int it = 0; it < 20; ++it) {
    for (auto* t : {&a, &b}) {
      auto g = t->mutable_grad();
      g[0] = std::sin(it + t->values()[0]);
      g[1] = 2.0 * t->values()[1];
    }
    adam_step<double>(store.parameters(), state);
    store.zero_grad();
  }
  CHECK(state.step == 20);
  CHECK(a.values()[0] == b.values()[0]);
  CHECK(a.values()[1] == b.values()[1]);

  const std::vector<double> keep(a.values().begin(), a.values().end());
  a.mutable_grad()[0] = 1.0;
  b.mutable_grad()[1] = std::nan("");
  CHECK_THROWS_WITH_AS(adam_step<double>(store.parameters(), state), doctest::Contains("non-finite gradient in b"),
                       std::runtime_error);
  CHECK(a.values()[0] == keep[0]);
  CHECK(state.step == 20);
}

TEST_CASE("checkpoint round trip and errors") {
  MaskNet<float> net(small_config(2, 16, 16, 2));
  randomize(net.store(), 3, 0.5);
  Checkpoint ckpt;
  save_parameters(ckpt, net.store());
  put_counter(ckpt, "train/iteration", 1234);
  const auto bytes = ckpt.encode();
  CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "MMVSCKPT");
  CHECK(bytes[8] == kCheckpointVersion);
  const auto back = Checkpoint::decode(bytes);
  CHECK(back.encode() == bytes);
  CHECK(get_counter(back, "train/iteration") == 1234);

  MaskNet<float> other(small_config(2, 16, 16, 2));
  load_parameters(back, other.store());
  for (std::size_t i = 0; i < net.store().parameters().size(); ++i) {
    const auto x = net.store().parameters()[i].tensor.values();
    const auto y = other.store().parameters()[i].tensor.values();
    REQUIRE(std::equal(x.begin(), x.end(), y.begin(), y.end()));
  }

  MaskNet<float> wider(small_config(2, 16, 16, 3));
  CHECK_THROWS_WITH(load_parameters(back, wider.store()), doctest::Contains("has shape"));
  MaskNet<float> more(small_config(3, 16, 16, 2));
  CHECK_THROWS_WITH(load_parameters(back, more.store()), doctest::Contains("masknet.enc1.conv.weight"));
  Checkpoint empty;
  CHECK_THROWS_WITH(load_parameters(empty, net.store()), doctest::Contains("checkpoint has no tensor"));

  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_WITH(Checkpoint::decode(bad), doctest::Contains("bad magic"));
  bad = bytes;
  bad.pop_back();
  CHECK_THROWS(Checkpoint::decode(bad));
  bad = bytes;
  bad[8] = 9;
  CHECK_THROWS_WITH(Checkpoint::decode(bad), doctest::Contains("version"));
}

TEST_CASE("inverse depth conversion floors small values") {
  const Tensor<float> t({1, 1, 1, 3}, {0.5f, 0.0f, 2.0f});
  const auto c = depth_from_inverse(t, 0, 1e-3);
  CHECK(c.floored == 1);
  CHECK(c.depth.values[0] == doctest::Approx(2.0));
  CHECK(c.depth.values[1] == doctest::Approx(1000.0));
  CHECK(c.depth.values[2] == doctest::Approx(0.5));
}

TEST_CASE("batch schedule walks seeded permutations") {
  std::vector<std::size_t> seen;
  for (std::uint64_t it = 0; it < 5; ++it) {
    const auto b = batch_indices(10, 2, 7, it);
    seen.insert(seen.end(), b.begin(), b.end());
  }
  std::vector<std::size_t> sorted = seen;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> all(10);
  std::iota(all.begin(), all.end(), 0);
  CHECK(sorted == all);
  CHECK(batch_indices(10, 4, 7, 3) == batch_indices(10, 4, 7, 3));
  CHECK(batch_indices(10, 4, 7, 3) != batch_indices(10, 4, 8, 3));
  CHECK(batch_indices(3, 4, 1, 0).size() == 4);
}

TEST_CASE("trainers are deterministic and resume exactly") {
  const auto planes = sampling::sample_inverse_depth_planes(1.0, 10.0, 4);
  const auto data = tiny_dataset(3, planes);
  const auto cfg = small_config(4, 24, 32);
  TrainerOptions opt;
  opt.batch_size = 2;
  opt.seed = 11;

  MaskNetTrainer a(cfg, opt), b(cfg, opt);
  std::vector<double> la, lb;
  for (int i = 0; i < 4; ++i) la.push_back(a.step(data));
  for (int i = 0; i < 2; ++i) lb.push_back(b.step(data));
  MaskNetTrainer c(cfg, opt);
  c.restore(Checkpoint::decode(b.checkpoint().encode()));
  CHECK(c.iteration() == 2);
  for (int i = 0; i < 2; ++i) lb.push_back(c.step(data));
  CHECK(la == lb);
  CHECK(la.front() == doctest::Approx(std::log(2.0)).epsilon(1e-6));

  const auto frozen = a.checkpoint();
  DispNetTrainer d1(cfg, opt, frozen), d2(cfg, opt, frozen);
  std::vector<double> l1, l2;
  for (int i = 0; i < 3; ++i) {
    l1.push_back(d1.step(data));
    l2.push_back(d2.step(data));
  }
  CHECK(l1 == l2);
  DispNetTrainer d3(cfg, opt, frozen);
  d3.restore(d1.checkpoint());
  CHECK(d3.step(data) == d1.step(data));

  Checkpoint no_masknet;
  CHECK_THROWS(DispNetTrainer(cfg, opt, no_masknet));
}

TEST_CASE("augmentation draws are deterministic and varied") {
  const auto a = Augmentation::draw(3, 10, 0);
  const auto b = Augmentation::draw(3, 10, 0);
  CHECK(a.flip_x == b.flip_x);
  CHECK(a.channel_order == b.channel_order);
  CHECK(a.gain == b.gain);
  std::size_t flips = 0, identity_orders = 0;
  for (std::uint64_t it = 0; it < 400; ++it) {
    const auto d = Augmentation::draw(3, it, it % 4);
    flips += d.flip_x;
    identity_orders += d.channel_order == std::array<std::size_t, 3>{0, 1, 2};
    for (float g : d.gain) CHECK((g >= 0.8f && g <= 1.2f));
  }
  CHECK(flips > 150);
  CHECK(flips < 250);
  CHECK(identity_orders > 30);
  CHECK(identity_orders < 110);
  CHECK(Augmentation{}.is_identity());
}

TEST_CASE("augmented targets equal targets pooled from the flipped depth") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(1.0, 9.0);
  masks::DepthMap d = masks::DepthMap::filled(11, 13, 1.0);
  for (auto& v : d.values) v = u(rng);
  d.validity[5] = 0;
  Augmentation a;
  a.flip_x = a.flip_y = true;
  masks::DepthMap flipped = d;
  for (std::size_t p = 0; p < d.pixel_count(); ++p) {
    flipped.values[d.pixel_count() - 1 - p] = d.values[p];
    flipped.validity[d.pixel_count() - 1 - p] = d.validity[p];
  }
  const auto planes = sampling::make_plane_set({2.0, 4.0, 6.0, 8.0});
  for (Extent e : {Extent{11, 13}, Extent{6, 7}, Extent{3, 4}, Extent{2, 2}}) {
    const auto m = augment(pool_mask_target(d, planes, e), a);
    const auto ref = pool_mask_target(flipped, planes, e);
    CHECK(m.masks == ref.masks);
    CHECK(m.valid == ref.valid);
    const auto inv = augment(pool_inverse_depth_target(d, e), a);
    const auto inv_ref = pool_inverse_depth_target(flipped, e);
    CHECK(inv.valid == inv_ref.valid);
    for (std::size_t i = 0; i < inv.values.size(); ++i) CHECK(inv.values[i] == doctest::Approx(inv_ref.values[i]));
  }
}

TEST_CASE("augmentation preserves per-pixel photo-consistency") {
  const auto data = tiny_dataset(1, sampling::sample_inverse_depth_planes(1.0, 10.0, 4));
  const auto& v = data[0].volumes[0];
  Augmentation a;
  a.flip_x = true;
  a.channel_order = {2, 0, 1};
  a.gain = {0.9f, 1.1f, 0.8f};
  const auto w = augment(v, a);
  const std::size_t h = v.height, wd = v.width, plane = h * wd;
  for (std::size_t g = 1; g < v.channels / 3; ++g) {
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < wd; ++x) {
          const auto src = y * wd + (wd - 1 - x), dst = y * wd + x;
          const std::size_t oc = a.channel_order[c];
          const float before = v.data[(3 * g + oc) * plane + src] - v.data[oc * plane + src];
          const float after = w.data[(3 * g + c) * plane + dst] - w.data[c * plane + dst];
          if (v.data[(3 * g + oc) * plane + src] * a.gain[c] < 1.0f && v.data[oc * plane + src] * a.gain[c] < 1.0f) {
            REQUIRE(after == doctest::Approx(a.gain[c] * before).epsilon(1e-5));
          }
        }
      }
    }
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < wd; ++x) {
        REQUIRE(w.validity[(g - 1) * plane + y * wd + x] == v.validity[(g - 1) * plane + y * wd + wd - 1 - x]);
      }
    }
  }
}

TEST_CASE("DispNet input augmentation leaves mask values alone") {
  const auto x = uniform_input<float>({1, 5, 4, 6}, 2);
  Augmentation a;
  a.flip_y = true;
  a.gain = {0.8f, 0.8f, 0.8f};
  const auto y = augment_dispnet_input(x, a);
  for (std::size_t c = 0; c < 5; ++c) {
    for (std::size_t r = 0; r < 4; ++r) {
      for (std::size_t q = 0; q < 6; ++q) {
        const float before = x.values()[(c * 4 + 3 - r) * 6 + q];
        const float after = y.values()[(c * 4 + r) * 6 + q];
        CHECK(after == doctest::Approx(c < 3 ? 0.8f * before : before));
      }
    }
  }
  CHECK_THROWS(augment_dispnet_input(uniform_input<float>({2, 5, 4, 6}, 2), a));
}
