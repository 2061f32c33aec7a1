#include <CLI11.hpp>

#include <algorithm>
#include <sstream>

#include "mmvs/cli/commands.hpp"

namespace mmvs::cli {

namespace {

std::vector<std::size_t> parse_index_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
      throw std::invalid_argument("bad neighbour list '" + text + "'");
    }
    out.push_back(std::stoul(item));
  }
  if (out.empty()) throw std::invalid_argument("empty neighbour list");
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Plane-sweep multi-view depth toolkit"};
  app.require_subcommand(1);
  RunConfig config;

  auto add_seed = [&](CLI::App* cmd) { cmd->add_option("--seed", config.seed, "Random seed (MMVS_SEED overrides)"); };

  fs::path gen_out;
  std::string depth_range;
  auto* gen = app.add_subcommand("gen-data", "Render a synthetic dataset");
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--scenes", config.scenes, "Number of scenes");
  gen->add_option("--neighbours", config.neighbours, "Neighbour views per sample");
  gen->add_option("--depth-range", depth_range, "Depth range a:b in metres");
  gen->add_option("--width", config.width, "Image width");
  gen->add_option("--height", config.height, "Image height");
  add_seed(gen);

  SamplePlanesArgs sp;
  auto* planes = app.add_subcommand("sample-planes", "Choose sweep plane depths");
  planes->add_option("--scheme", config.scheme, "hist or inverse");
  planes->add_option("--planes", config.planes, "Plane count D");
  planes->add_option("--theta-min", config.theta_min);
  planes->add_option("--theta-max", config.theta_max);
  planes->add_option("--dmin", config.d_min);
  planes->add_option("--dmax", config.d_max);
  planes->add_option("--bins", config.bins);
  planes->add_option("--hist-dmax", config.histogram_d_max, "Histogram range (0: dataset maximum)");
  planes->add_option("--data", sp.data, "Dataset root");
  planes->add_option("--histogram", sp.histogram, "Existing histogram record");
  planes->add_option("--out", sp.out, "Plane list output")->required();

  BuildVolumeArgs bv;
  auto* volume = app.add_subcommand("build-volume", "Write the warp volume of one sample");
  volume->add_option("--sample", bv.sample)->required();
  volume->add_option("--plane-file", bv.plane_file)->required();
  volume->add_option("--neighbour", bv.neighbour);
  volume->add_option("--out", bv.out)->required();

  MakeMasksArgs mm;
  auto* make_masks = app.add_subcommand("make-masks", "Write ground-truth masks of one sample");
  make_masks->add_option("--sample", mm.sample)->required();
  make_masks->add_option("--plane-file", mm.plane_file)->required();
  make_masks->add_option("--out", mm.out)->required();

  TrainArgs ta;
  bool dump_config = false;
  auto* train = app.add_subcommand("train", "Train MaskNet or DispNet");
  train->add_option("--stage", config.stage, "masknet or dispnet");
  train->add_option("--data", ta.data, "Dataset root");
  train->add_option("--plane-file", ta.plane_file);
  train->add_option("--out", ta.out, "Output directory");
  train->add_option("--masknet-checkpoint", ta.masknet_checkpoint);
  train->add_option("--resume", ta.resume, "Checkpoint to continue from");
  train->add_option("--iterations", config.iterations);
  train->add_option("--checkpoint-every", config.checkpoint_every);
  train->add_option("--batch-size", config.batch_size);
  train->add_flag("!--no-augment", config.augment, "Disable training augmentation");
  train->add_option("--masknet-lr", config.masknet_lr);
  train->add_option("--dispnet-lr", config.dispnet_lr);
  train->add_option("--beta1", config.beta1);
  train->add_option("--beta2", config.beta2);
  train->add_option("--base-channels", config.base_channels);
  train->add_flag("--dump-config", dump_config, "Print the resolved configuration and exit");
  add_seed(train);

  PredictArgs pa;
  std::string use_neighbours;
  auto* predict = app.add_subcommand("predict", "Predict depth maps");
  predict->add_option("--sample", pa.sample, "Sample directory");
  predict->add_option("--data", pa.data, "Dataset root (one output per sample)");
  predict->add_option("--plane-file", pa.plane_file)->required();
  predict->add_option("--masknet", pa.masknet)->required();
  predict->add_option("--dispnet", pa.dispnet);
  predict->add_option("--out", pa.out)->required();
  predict->add_option("--dump-masks", pa.dump_masks);
  predict->add_flag("--decode-from-masks", pa.decode_from_masks);
  predict->add_option("--use-neighbours", use_neighbours, "Comma-separated neighbour indices");
  predict->add_option("--base-channels", config.base_channels);
  predict->add_option("--depth-floor", config.inverse_depth_floor, "Inverse-depth floor");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  eval->add_option("--data", ea.data)->required();
  eval->add_option("--predictions", ea.predictions)->required();

  DecodeMasksArgs dm;
  auto* decode = app.add_subcommand("decode-masks", "Decode depth from a mask file");
  decode->add_option("--masks", dm.masks)->required();
  decode->add_option("--plane-file", dm.plane_file)->required();
  decode->add_option("--out", dm.out)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    apply_environment(config);
    if (gen->parsed()) {
      if (!depth_range.empty()) std::tie(config.depth_min, config.depth_max) = parse_range(depth_range);
      cmd_gen_data(config, gen_out, out);
    } else if (planes->parsed()) {
      cmd_sample_planes(config, sp, out);
    } else if (volume->parsed()) {
      cmd_build_volume(bv, out);
    } else if (make_masks->parsed()) {
      cmd_make_masks(mm, out);
    } else if (train->parsed()) {
      if (dump_config) {
        out << config.to_json().dump(2) << "\n";
        return 0;
      }
      if (ta.data.empty() || ta.plane_file.empty() || ta.out.empty()) {
        throw std::invalid_argument("train needs --data, --plane-file and --out");
      }
      cmd_train(config, ta, out);
    } else if (predict->parsed()) {
      if (!use_neighbours.empty()) pa.use_neighbours = parse_index_list(use_neighbours);
      cmd_predict(config, pa, out);
    } else if (eval->parsed()) {
      cmd_eval(ea, out);
    } else if (decode->parsed()) {
      cmd_decode_masks(dm, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace mmvs::cli
