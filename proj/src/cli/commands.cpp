#include "mmvs/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>

#include "mmvs/evalkit/dataset.hpp"
#include "mmvs/evalkit/metrics.hpp"
#include "mmvs/evalkit/sample_io.hpp"
#include "mmvs/geometry/warp.hpp"
#include "mmvs/io/tensor_file.hpp"
#include "mmvs/masks/multiplane_mask.hpp"
#include "mmvs/neural/checkpoint.hpp"
#include "mmvs/neural/convert.hpp"
#include "mmvs/neural/training.hpp"
#include "mmvs/sampling/histogram.hpp"
#include "mmvs/sampling/persistence.hpp"

namespace mmvs::cli {

namespace {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  io::write_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

void ensure_parent(const fs::path& path) {
  if (path.empty()) throw std::invalid_argument("missing output path");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

nn::PreparedSample prepare(const evalkit::Sample& s, const sampling::PlaneSet& planes,
                           const std::vector<std::size_t>& use) {
  std::vector<geometry::ImageBuffer> images;
  std::vector<geometry::RelativePose> poses;
  if (use.empty()) {
    for (const auto& n : s.neighbours) {
      images.push_back(n.image);
      poses.push_back(n.pose);
    }
  } else {
    for (auto k : use) {
      if (k >= s.neighbours.size()) {
        throw std::invalid_argument("sample " + s.id + " has no neighbour " + std::to_string(k));
      }
      images.push_back(s.neighbours[k].image);
      poses.push_back(s.neighbours[k].pose);
    }
  }
  return nn::prepare_sample(s.id, s.camera, s.reference, images, poses, s.truth, planes);
}

io::TensorFile mask_to_tensor(const masks::MultiplaneMask& m) {
  io::TensorFile t;
  t.axes = {static_cast<std::uint32_t>(m.planes), static_cast<std::uint32_t>(m.height),
            static_cast<std::uint32_t>(m.width)};
  t.payload = m.values;
  const auto n = m.pixel_count();
  for (std::size_t i = 0; i < m.planes; ++i) {
    for (std::size_t p = 0; p < n; ++p) {
      if (!m.valid(p)) t.payload[i * n + p] = std::numeric_limits<float>::quiet_NaN();
    }
  }
  return t;
}

masks::MultiplaneMask mask_from_file(const io::TensorFile& t) {
  if (t.axes.size() != 3) throw std::invalid_argument("mask file must have axes [D, H, W]");
  masks::MultiplaneMask m;
  m.planes = t.axes[0];
  m.height = t.axes[1];
  m.width = t.axes[2];
  m.values = t.payload;
  const auto n = m.pixel_count();
  m.validity.assign(n, 1);
  for (std::size_t i = 0; i < m.planes; ++i) {
    for (std::size_t p = 0; p < n; ++p) {
      if (std::isnan(m.values[i * n + p])) {
        m.validity[p] = 0;
        m.values[i * n + p] = 0.0f;
      }
    }
  }
  m.check();
  return m;
}

}  // namespace

void cmd_gen_data(const RunConfig& config, const fs::path& out, std::ostream& log) {
  if (out.empty()) throw std::invalid_argument("gen-data needs --out");
  evalkit::MotionProfile motion;
  motion.neighbours = config.neighbours;
  motion.check();
  const auto camera = evalkit::default_camera(config.width, config.height);
  const auto options = evalkit::SceneOptions::for_depth_range(config.depth_min, config.depth_max);
  const auto samples = evalkit::generate_dataset(config.seed, config.scenes, camera, options, motion);
  fs::create_directories(out);
  std::vector<evalkit::ManifestEntry> manifest;
  for (const auto& s : samples) {
    evalkit::write_sample(out / s.id, s);
    manifest.push_back({s.id, s.seed});
  }
  evalkit::write_manifest(out, manifest);
  log << "wrote " << samples.size() << " samples to " << out.string() << "\n";
}

void cmd_sample_planes(const RunConfig& config, const SamplePlanesArgs& args, std::ostream& log) {
  if (args.out.empty()) throw std::invalid_argument("sample-planes needs --out");
  sampling::PlaneSet planes;
  if (config.scheme == "inverse") {
    planes = sampling::sample_inverse_depth_planes(config.d_min, config.d_max, config.planes);
  } else if (config.scheme == "hist") {
    sampling::DepthHistogram hist;
    if (!args.histogram.empty()) {
      hist = sampling::read_histogram(args.histogram);
    } else {
      if (args.data.empty()) throw std::invalid_argument("histogram scheme needs --data or --histogram");
      const auto samples = evalkit::read_dataset(args.data);
      if (samples.empty()) throw std::invalid_argument("dataset " + args.data.string() + " is empty");
      double d_max = config.histogram_d_max;
      if (d_max <= 0.0) {
        for (const auto& s : samples) {
          for (std::size_t p = 0; p < s.truth.pixel_count(); ++p) {
            if (s.truth.valid(p)) d_max = std::max(d_max, s.truth.values[p]);
          }
        }
      }
      if (!(d_max > 0.0)) throw std::invalid_argument("dataset has no valid depth");
      sampling::HistogramAccumulator acc(config.bins, d_max);
      for (const auto& s : samples) {
        for (std::size_t p = 0; p < s.truth.pixel_count(); ++p) {
          if (s.truth.valid(p)) acc.add(s.truth.values[p]);
        }
      }
      hist = acc.finish();
      auto hist_path = args.out;
      hist_path.replace_extension(".dhst");
      ensure_parent(hist_path);
      sampling::write_histogram(hist_path, hist);
      log << "histogram: " << hist_path.string() << "\n";
    }
    planes = sampling::sample_histogram_planes(sampling::to_cdf(hist), config.planes, config.theta_min,
                                               config.theta_max);
  } else {
    throw std::invalid_argument("unknown scheme '" + config.scheme + "' (expected hist or inverse)");
  }
  ensure_parent(args.out);
  sampling::write_planes(args.out, planes);
  log << "planes: " << planes.size() << " in [" << format_number(planes.front()) << ", "
      << format_number(planes.back()) << "] -> " << args.out.string() << "\n";
}

void cmd_build_volume(const BuildVolumeArgs& args, std::ostream& log) {
  const auto sample = evalkit::read_sample(args.sample);
  const auto planes = sampling::read_planes(args.plane_file);
  if (args.neighbour >= sample.neighbours.size()) {
    throw std::invalid_argument("sample has no neighbour " + std::to_string(args.neighbour));
  }
  const auto& n = sample.neighbours[args.neighbour];
  const auto volume = geometry::build_warp_volume(sample.reference, n.image, sample.camera, n.pose, planes);
  io::TensorFile t;
  t.axes = {static_cast<std::uint32_t>(volume.channels), static_cast<std::uint32_t>(volume.height),
            static_cast<std::uint32_t>(volume.width)};
  t.payload = volume.data;
  ensure_parent(args.out);
  io::write_tensor_file(args.out, t);
  log << "volume " << volume.channels << "x" << volume.height << "x" << volume.width << " -> " << args.out.string()
      << "\n";
}

void cmd_make_masks(const MakeMasksArgs& args, std::ostream& log) {
  const auto sample = evalkit::read_sample(args.sample);
  const auto planes = sampling::read_planes(args.plane_file);
  const auto m = masks::make_ground_truth_masks(sample.truth, planes);
  ensure_parent(args.out);
  io::write_tensor_file(args.out, mask_to_tensor(m));
  log << "masks " << m.planes << "x" << m.height << "x" << m.width << " -> " << args.out.string() << "\n";
}

void cmd_train(const RunConfig& config, const TrainArgs& args, std::ostream& log) {
  if (config.stage != "masknet" && config.stage != "dispnet") {
    throw std::invalid_argument("unknown stage '" + config.stage + "' (expected masknet or dispnet)");
  }
  if (config.stage == "dispnet" && args.masknet_checkpoint.empty()) {
    throw std::invalid_argument("the dispnet stage requires --masknet-checkpoint");
  }
  if (args.out.empty()) throw std::invalid_argument("train needs --out");
  const auto samples = evalkit::read_dataset(args.data);
  if (samples.empty()) throw std::invalid_argument("dataset " + args.data.string() + " is empty");
  const auto planes = sampling::read_planes(args.plane_file);

  auto run = config;
  run.height = samples.front().reference.height;
  run.width = samples.front().reference.width;
  const auto network = run.network(planes.size());
  nn::TrainerOptions options;
  options.adam = run.adam();
  options.batch_size = run.batch_size;
  options.augment = run.augment;
  options.seed = run.seed;

  std::vector<nn::PreparedSample> prepared;
  for (const auto& s : samples) prepared.push_back(prepare(s, planes, {}));

  fs::create_directories(args.out);
  write_text(args.out / "config.json", run.to_json().dump(2) + "\n");
  const auto mode = args.resume.empty() ? std::ios::trunc : std::ios::app;
  std::ofstream loss_log(args.out / "loss.log", std::ios::out | mode);
  std::ofstream timing_log(args.out / "timing.log", std::ios::out | mode);
  if (!loss_log || !timing_log) throw std::runtime_error("cannot write logs in " + args.out.string());
  const auto ckpt_path = args.out / (run.stage + ".ckpt");

  auto loop = [&](auto& trainer) {
    if (!args.resume.empty()) trainer.restore(nn::Checkpoint::load(args.resume));
    const auto start = std::chrono::steady_clock::now();
    while (trainer.iteration() < run.iterations) {
      const double loss = trainer.step(prepared);
      const auto it = trainer.iteration();
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      loss_log << it << '\t' << format_number(loss) << '\n';
      timing_log << it << '\t' << format_number(elapsed.count()) << '\n';
      if (run.checkpoint_every > 0 && it % run.checkpoint_every == 0) {
        loss_log.flush();
        timing_log.flush();
        trainer.checkpoint().save(ckpt_path);
      }
    }
    trainer.checkpoint().save(ckpt_path);
    log << run.stage << ": " << trainer.iteration() << " iterations -> " << ckpt_path.string() << "\n";
  };
  if (run.stage == "masknet") {
    nn::MaskNetTrainer trainer(network, options);
    loop(trainer);
  } else {
    nn::DispNetTrainer trainer(network, options, nn::Checkpoint::load(args.masknet_checkpoint));
    loop(trainer);
  }
}

void cmd_predict(const RunConfig& config, const PredictArgs& args, std::ostream& log) {
  if (args.sample.empty() == args.data.empty()) throw std::invalid_argument("predict needs exactly one of --sample or --data");
  if (args.out.empty()) throw std::invalid_argument("predict needs --out");
  if (args.masknet.empty()) throw std::invalid_argument("predict needs --masknet");
  if (!args.decode_from_masks && args.dispnet.empty()) {
    throw std::invalid_argument("predict needs --dispnet unless --decode-from-masks is given");
  }
  const auto planes = sampling::read_planes(args.plane_file);

  std::vector<std::pair<evalkit::Sample, fs::path>> jobs;
  if (!args.sample.empty()) {
    jobs.emplace_back(evalkit::read_sample(args.sample), args.out);
  } else {
    for (const auto& e : evalkit::read_manifest(args.data)) {
      jobs.emplace_back(evalkit::read_sample(args.data / e.id), args.out / (e.id + ".mmvs"));
    }
  }
  if (jobs.empty()) throw std::invalid_argument("nothing to predict");

  auto run = config;
  run.height = jobs.front().first.reference.height;
  run.width = jobs.front().first.reference.width;
  const auto network = run.network(planes.size());
  nn::MaskNet<float> masknet(network);
  nn::load_parameters(nn::Checkpoint::load(args.masknet), masknet.store());
  std::optional<nn::DispNet<float>> dispnet;
  if (!args.decode_from_masks) {
    dispnet.emplace(network);
    nn::load_parameters(nn::Checkpoint::load(args.dispnet), dispnet->store());
  }

  for (const auto& [sample, out_path] : jobs) {
    const auto prepared = prepare(sample, planes, args.use_neighbours);
    const auto fused = nn::predict_fused_masks(masknet, prepared.volumes);
    masks::DepthMap depth;
    std::size_t floored = 0;
    if (args.decode_from_masks) {
      depth = masks::decode_depth_from_masks(fused, planes);
    } else {
      const auto inverse = nn::predict_inverse_depth(*dispnet, prepared.reference, fused);
      auto converted = nn::depth_from_inverse(inverse, 0, run.inverse_depth_floor);
      depth = std::move(converted.depth);
      floored = converted.floored;
    }
    ensure_parent(out_path);
    io::write_tensor_file(out_path, evalkit::depth_to_tensor(depth));
    if (!args.dump_masks.empty()) {
      const auto mask_path = args.data.empty() ? args.dump_masks : args.dump_masks / (sample.id + ".mmvs");
      ensure_parent(mask_path);
      io::write_tensor_file(mask_path, mask_to_tensor(fused));
    }
    log << sample.id << "\tfloored\t" << floored << "\t-> " << out_path.string() << "\n";
  }
}

void cmd_eval(const EvalArgs& args, std::ostream& out) {
  const auto manifest = evalkit::read_manifest(args.data);
  if (manifest.empty()) throw std::invalid_argument("manifest is empty");
  std::vector<std::pair<std::string, evalkit::MetricReport>> rows;
  for (const auto& e : manifest) {
    const auto pred_path = args.predictions / (e.id + ".mmvs");
    if (!fs::exists(pred_path)) throw std::runtime_error("missing prediction for sample " + e.id);
    const auto truth = evalkit::depth_from_tensor(io::read_tensor_file(args.data / e.id / evalkit::kDepthFile));
    const auto pred = evalkit::depth_from_tensor(io::read_tensor_file(pred_path));
    if (pred.height != truth.height || pred.width != truth.width) {
      throw std::runtime_error("prediction for sample " + e.id + " does not match the ground-truth size");
    }
    rows.emplace_back(e.id, evalkit::compute_metrics(pred, truth));
  }
  out << "sample\tl1_rel\tl1_inv\tsc_inv\tvalid_pixels\texcluded\n";
  double rel = 0.0, inv = 0.0, sc = 0.0;
  std::size_t valid = 0, excluded = 0;
  for (const auto& [id, r] : rows) {
    out << id << '\t' << format_number(r.l1_rel) << '\t' << format_number(r.l1_inv) << '\t'
        << format_number(r.sc_inv) << '\t' << r.valid_pixel_count << '\t' << r.excluded_nonpositive << '\n';
    rel += r.l1_rel;
    inv += r.l1_inv;
    sc += r.sc_inv;
    valid += r.valid_pixel_count;
    excluded += r.excluded_nonpositive;
  }
  const auto n = static_cast<double>(rows.size());
  out << "mean\t" << format_number(rel / n) << '\t' << format_number(inv / n) << '\t' << format_number(sc / n)
      << '\t' << valid << '\t' << excluded << '\n';
}

void cmd_decode_masks(const DecodeMasksArgs& args, std::ostream& log) {
  const auto m = mask_from_file(io::read_tensor_file(args.masks));
  const auto planes = sampling::read_planes(args.plane_file);
  const auto depth = masks::decode_depth_from_masks(m, planes);
  ensure_parent(args.out);
  io::write_tensor_file(args.out, evalkit::depth_to_tensor(depth));
  log << "decoded " << depth.height << "x" << depth.width << " -> " << args.out.string() << "\n";
}

}  // namespace mmvs::cli
