#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mmvs/cli/commands.hpp"
#include "mmvs/evalkit/sample_io.hpp"
#include "mmvs/io/tensor_file.hpp"
#include "mmvs/masks/multiplane_mask.hpp"
#include "mmvs/sampling/persistence.hpp"

namespace fs = std::filesystem;
using namespace mmvs;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli::run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("mmvs_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return files;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, '\t');) out.push_back(f);
  return out;
}

// Small dataset, plane file and trained checkpoints shared by the slower cases.
struct Workspace {
  fs::path root = scratch("workspace");
  fs::path data = root / "data";
  fs::path planes = root / "planes.txt";
  fs::path masknet = root / "mn";
  fs::path dispnet = root / "dn";

  Workspace() {
    REQUIRE(run({"gen-data", "--out", data.string(), "--scenes", "3", "--seed", "5", "--width", "32", "--height",
                 "24"}).code == 0);
    REQUIRE(run({"sample-planes", "--data", data.string(), "--scheme", "hist", "--planes", "4", "--out",
                 planes.string()}).code == 0);
    const std::vector<std::string> common{"--data", data.string(), "--plane-file", planes.string(), "--iterations",
                                          "4", "--batch-size", "2", "--base-channels", "2"};
    auto mn = std::vector<std::string>{"train", "--out", masknet.string()};
    mn.insert(mn.end(), common.begin(), common.end());
    REQUIRE(run(mn).code == 0);
    auto dn = std::vector<std::string>{"train", "--stage", "dispnet", "--out", dispnet.string(),
                                       "--masknet-checkpoint", (masknet / "masknet.ckpt").string()};
    dn.insert(dn.end(), common.begin(), common.end());
    REQUIRE(run(dn).code == 0);
  }
  std::string sample(std::size_t i) const {
    return (data / evalkit::read_manifest(data).at(i).id).string();
  }
};

Workspace& workspace() {
  static Workspace w;
  return w;
}

}  // namespace

TEST_CASE("gen-data is byte-deterministic") {
  const auto dir = scratch("gen");
  for (const char* name : {"a", "b"}) {
    REQUIRE(run({"gen-data", "--out", (dir / name).string(), "--scenes", "4", "--seed", "7", "--width", "32",
                 "--height", "24"}).code == 0);
  }
  const auto a = tree(dir / "a");
  CHECK(a.size() == 1 + 4 * 6);
  CHECK(a == tree(dir / "b"));
}

TEST_CASE("gen-data writes one reference and the requested neighbours") {
  const auto dir = scratch("neighbours");
  REQUIRE(run({"gen-data", "--out", dir.string(), "--scenes", "2", "--neighbours", "2", "--depth-range", "1:10",
               "--width", "32", "--height", "24"}).code == 0);
  for (const auto& e : evalkit::read_manifest(dir)) {
    std::size_t images = 0;
    for (const auto& f : fs::directory_iterator(dir / e.id)) images += f.path().extension() == ".ppm";
    CHECK(images == 3);
    const auto depth = io::read_tensor_file(dir / e.id / evalkit::kDepthFile);
    for (float v : depth.payload) {
      if (std::isnan(v)) continue;
      CHECK(v >= 1.0f);
      CHECK(v <= 10.0f);
    }
  }
  CHECK(run({"gen-data", "--out", dir.string(), "--depth-range", "5:2"}).code != 0);
}

TEST_CASE("MMVS_SEED overrides the seed flag") {
  const auto dir = scratch("env");
  REQUIRE(run({"gen-data", "--out", (dir / "flag").string(), "--scenes", "2", "--seed", "9", "--width", "32",
               "--height", "24"}).code == 0);
  ::setenv("MMVS_SEED", "9", 1);
  const auto r = run({"gen-data", "--out", (dir / "env").string(), "--scenes", "2", "--seed", "1", "--width", "32",
                      "--height", "24"});
  ::unsetenv("MMVS_SEED");
  REQUIRE(r.code == 0);
  CHECK(tree(dir / "flag") == tree(dir / "env"));
}

TEST_CASE("sample-planes with the inverse scheme") {
  const auto dir = scratch("planes");
  const auto out = dir / "inv.txt";
  REQUIRE(run({"sample-planes", "--scheme", "inverse", "--dmin", "0.5", "--dmax", "50", "--planes", "16", "--out",
               out.string()}).code == 0);
  const auto rows = lines(slurp(out));
  REQUIRE(rows.size() == 16);
  CHECK(std::stod(rows.front()) == 0.5);
  CHECK(std::stod(rows.back()) == 50.0);
  const auto r = run({"sample-planes", "--scheme", "inverse", "--planes", "1", "--out", (dir / "one.txt").string()});
  CHECK(r.code != 0);
  CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("sample-planes with the histogram scheme") {
  auto& w = workspace();
  const auto planes = sampling::read_planes(w.planes);
  CHECK(planes.size() == 4);
  CHECK(fs::exists(w.root / "planes.dhst"));
  const auto again = scratch("hist") / "again.txt";
  REQUIRE(run({"sample-planes", "--histogram", (w.root / "planes.dhst").string(), "--planes", "4", "--out",
               again.string()}).code == 0);
  CHECK(slurp(again) == slurp(w.planes));
  CHECK(run({"sample-planes", "--scheme", "hist", "--out", again.string()}).code != 0);
}

TEST_CASE("train defaults follow the published hyperparameters") {
  const auto r = run({"train", "--dump-config"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  const auto& s = j.at("sampling");
  CHECK(s.at("planes") == 16);
  CHECK(s.at("theta_min") == 0.1);
  CHECK(s.at("theta_max") == 1.0);
  const auto& o = j.at("optimizer");
  CHECK(o.at("beta1") == 0.9);
  CHECK(o.at("beta2") == 0.999);
  CHECK(o.at("batch_size") == 4);
  CHECK(o.at("masknet_lr") == 2e-4);
  CHECK(o.at("dispnet_lr") == 1e-4);
  CHECK(o.at("lr") == 2e-4);
  CHECK(o.at("stage") == "masknet");
  CHECK(j.at("network").at("loss_weights") == std::vector<double>{0.1, 0.1, 0.1, 0.1, 0.1, 0.5});
}

TEST_CASE("the dispnet stage needs a MaskNet checkpoint") {
  auto& w = workspace();
  const auto r = run({"train", "--stage", "dispnet", "--data", w.data.string(), "--plane-file", w.planes.string(),
                      "--out", scratch("nomask").string()});
  CHECK(r.code != 0);
  CHECK(r.err.find("--masknet-checkpoint") != std::string::npos);
}

TEST_CASE("training logs are reproducible and resumable") {
  auto& w = workspace();
  const auto dir = scratch("train");
  const std::vector<std::string> common{"--data", w.data.string(), "--plane-file", w.planes.string(),
                                        "--batch-size", "2", "--base-channels", "2", "--checkpoint-every", "2"};
  auto train = [&](const fs::path& out, std::string iterations, std::vector<std::string> extra = {}) {
    std::vector<std::string> a{"train", "--out", out.string(), "--iterations", iterations};
    a.insert(a.end(), common.begin(), common.end());
    a.insert(a.end(), extra.begin(), extra.end());
    REQUIRE(run(a).code == 0);
  };
  train(dir / "one", "4");
  train(dir / "two", "4");
  CHECK(slurp(dir / "one" / "loss.log") == slurp(dir / "two" / "loss.log"));
  CHECK(slurp(dir / "one" / "masknet.ckpt") == slurp(dir / "two" / "masknet.ckpt"));
  CHECK(slurp(dir / "one" / "loss.log") == slurp(w.masknet / "loss.log"));

  train(dir / "resumed", "2");
  train(dir / "resumed", "4", {"--resume", (dir / "resumed" / "masknet.ckpt").string()});
  const auto full = lines(slurp(dir / "one" / "loss.log"));
  const auto resumed = lines(slurp(dir / "resumed" / "loss.log"));
  REQUIRE(full.size() == 4);
  REQUIRE(resumed.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto a = split_tabs(full[i]), b = split_tabs(resumed[i]);
    CHECK(a[0] == b[0]);
    CHECK(std::abs(std::stod(a[1]) - std::stod(b[1])) <= 1e-6);
  }
  CHECK(std::stod(split_tabs(full[0])[1]) == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  CHECK(lines(slurp(dir / "one" / "timing.log")).size() == 4);
}

TEST_CASE("a mismatched checkpoint is reported by tensor name") {
  auto& w = workspace();
  const auto r = run({"predict", "--sample", w.sample(0), "--plane-file", w.planes.string(), "--masknet",
                      (w.masknet / "masknet.ckpt").string(), "--decode-from-masks", "--base-channels", "3",
                      "--out", (scratch("mismatch") / "d.mmvs").string()});
  CHECK(r.code != 0);
  CHECK(r.err.find("masknet.") != std::string::npos);
}

TEST_CASE("predict output matches the reference axes and fuses duplicates idempotently") {
  auto& w = workspace();
  const auto dir = scratch("predict");
  auto predict = [&](const std::string& name, std::vector<std::string> extra) {
    std::vector<std::string> a{"predict", "--sample", w.sample(1), "--plane-file", w.planes.string(), "--masknet",
                               (w.masknet / "masknet.ckpt").string(), "--dispnet",
                               (w.dispnet / "dispnet.ckpt").string(), "--base-channels", "2", "--out",
                               (dir / name).string()};
    a.insert(a.end(), extra.begin(), extra.end());
    const auto r = run(a);
    INFO(r.err);
    REQUIRE(r.code == 0);
    return io::read_tensor_file(dir / name);
  };
  const auto single = predict("single.mmvs", {"--use-neighbours", "0"});
  const auto twice = predict("twice.mmvs", {"--use-neighbours", "0,0"});
  CHECK(single.axes == std::vector<std::uint32_t>{24, 32});
  CHECK(single.payload == twice.payload);
  const auto both = predict("both.mmvs", {});
  CHECK(both.axes == single.axes);
  for (float v : both.payload) CHECK(v > 0.0f);
  CHECK(run({"predict", "--sample", w.sample(1), "--plane-file", w.planes.string(), "--masknet",
             (w.masknet / "masknet.ckpt").string(), "--decode-from-masks", "--use-neighbours", "5", "--out",
             (dir / "x.mmvs").string()}).code != 0);
}

TEST_CASE("decoding from masks stays inside the plane range and matches decode-masks") {
  auto& w = workspace();
  const auto dir = scratch("decode");
  const auto planes = sampling::read_planes(w.planes);
  REQUIRE(run({"predict", "--sample", w.sample(2), "--plane-file", w.planes.string(), "--masknet",
               (w.masknet / "masknet.ckpt").string(), "--decode-from-masks", "--base-channels", "2", "--dump-masks",
               (dir / "masks.mmvs").string(), "--out", (dir / "depth.mmvs").string()}).code == 0);
  const auto depth = io::read_tensor_file(dir / "depth.mmvs");
  const auto masks = io::read_tensor_file(dir / "masks.mmvs");
  CHECK(masks.axes == std::vector<std::uint32_t>{4, 24, 32});
  for (float v : depth.payload) {
    CHECK(v >= static_cast<float>(planes.front()));
    CHECK(v <= static_cast<float>(planes.back()));
  }
  REQUIRE(run({"decode-masks", "--masks", (dir / "masks.mmvs").string(), "--plane-file", w.planes.string(), "--out",
               (dir / "again.mmvs").string()}).code == 0);
  CHECK(slurp(dir / "again.mmvs") == slurp(dir / "depth.mmvs"));
}

TEST_CASE("decode-masks brackets ground-truth depth") {
  auto& w = workspace();
  const auto dir = scratch("gtmasks");
  const auto planes = sampling::read_planes(w.planes);
  REQUIRE(run({"make-masks", "--sample", w.sample(0), "--plane-file", w.planes.string(), "--out",
               (dir / "m.mmvs").string()}).code == 0);
  REQUIRE(run({"decode-masks", "--masks", (dir / "m.mmvs").string(), "--plane-file", w.planes.string(), "--out",
               (dir / "d.mmvs").string()}).code == 0);
  const auto truth = io::read_tensor_file(fs::path(w.sample(0)) / evalkit::kDepthFile);
  const auto decoded = io::read_tensor_file(dir / "d.mmvs");
  REQUIRE(truth.payload.size() == decoded.payload.size());
  for (std::size_t i = 0; i < truth.payload.size(); ++i) {
    const double t = truth.payload[i], d = decoded.payload[i];
    if (std::isnan(t)) continue;
    if (t <= planes.front() || t > planes.back()) continue;
    std::size_t k = 1;
    while (planes.depths[k] < t) ++k;
    CHECK(d >= planes.depths[k - 1] - 1e-5);
    CHECK(d <= planes.depths[k] + 1e-5);
  }
}

TEST_CASE("build-volume writes the plane-sweep volume") {
  auto& w = workspace();
  const auto out = scratch("volume") / "v.mmvs";
  REQUIRE(run({"build-volume", "--sample", w.sample(0), "--plane-file", w.planes.string(), "--neighbour", "1",
               "--out", out.string()}).code == 0);
  CHECK(io::read_tensor_file(out).axes == std::vector<std::uint32_t>{15, 24, 32});
}

TEST_CASE("eval of the ground truth scores zero") {
  auto& w = workspace();
  const auto dir = scratch("eval_identity");
  for (const auto& e : evalkit::read_manifest(w.data)) {
    fs::copy_file(w.data / e.id / evalkit::kDepthFile, dir / (e.id + ".mmvs"));
  }
  const auto r = run({"eval", "--data", w.data.string(), "--predictions", dir.string()});
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == "sample\tl1_rel\tl1_inv\tsc_inv\tvalid_pixels\texcluded");
  const auto mean = split_tabs(rows.back());
  CHECK(mean[0] == "mean");
  for (std::size_t c = 1; c <= 3; ++c) CHECK(std::stod(mean[c]) == 0.0);
}

TEST_CASE("eval reports a missing prediction by sample id") {
  auto& w = workspace();
  const auto dir = scratch("eval_missing");
  const auto manifest = evalkit::read_manifest(w.data);
  fs::copy_file(w.data / manifest[0].id / evalkit::kDepthFile, dir / (manifest[0].id + ".mmvs"));
  const auto r = run({"eval", "--data", w.data.string(), "--predictions", dir.string()});
  CHECK(r.code != 0);
  CHECK(r.err.find(manifest[1].id) != std::string::npos);
}

TEST_CASE("eval of a constant prediction matches a direct evaluation") {
  auto& w = workspace();
  const auto dir = scratch("eval_constant");
  const auto manifest = evalkit::read_manifest(w.data);
  std::vector<std::array<double, 3>> expected;
  for (const auto& e : manifest) {
    auto truth = io::read_tensor_file(w.data / e.id / evalkit::kDepthFile);
    io::TensorFile pred{truth.axes, std::vector<float>(truth.payload.size(), 3.0f)};
    io::write_tensor_file(dir / (e.id + ".mmvs"), pred);
    double n = 0, rel = 0, inv = 0, z1 = 0, z2 = 0;
    for (float t : truth.payload) {
      if (std::isnan(t)) continue;
      const double z = std::log(3.0) - std::log(static_cast<double>(t));
      n += 1;
      rel += std::abs(3.0 - t) / t;
      inv += std::abs(1.0 / 3.0 - 1.0 / t);
      z1 += z;
      z2 += z * z;
    }
    expected.push_back({rel / n, inv / n, std::sqrt(std::max(0.0, z2 / n - z1 * z1 / (n * n)))});
  }
  const auto r = run({"eval", "--data", w.data.string(), "--predictions", dir.string()});
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto f = split_tabs(rows[i + 1]);
    CHECK(f[0] == manifest[i].id);
    for (std::size_t c = 0; c < 3; ++c) CHECK(std::stod(f[c + 1]) == doctest::Approx(expected[i][c]).epsilon(1e-6));
  }
}

TEST_CASE("tensor files round-trip bit-exactly including NaN") {
  io::TensorFile t{{2, 3}, {1.0f, -0.0f, std::nanf(""), 3.5e-38f, 1e30f, -7.25f}};
  const auto bytes = io::encode_tensor_file(t);
  const auto back = io::decode_tensor_file(bytes);
  CHECK(back.axes == t.axes);
  CHECK(io::encode_tensor_file(back) == bytes);
  CHECK(std::memcmp(back.payload.data(), t.payload.data(), t.payload.size() * 4) == 0);
}

TEST_CASE("unknown commands and bad flags fail cleanly") {
  CHECK(run({"frobnicate"}).code != 0);
  CHECK(run({"train", "--stage", "joint", "--dump-config"}).code == 0);
  const auto r = run({"train", "--stage", "joint", "--data", "/nonexistent", "--out", scratch("joint").string()});
  CHECK(r.code != 0);
}
