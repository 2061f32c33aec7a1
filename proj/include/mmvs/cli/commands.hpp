#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "mmvs/cli/config.hpp"

namespace mmvs::cli {

namespace fs = std::filesystem;

/// Writes one directory per scene plus manifest.txt under `out`.
void cmd_gen_data(const RunConfig& config, const fs::path& out, std::ostream& log);

struct SamplePlanesArgs {
  fs::path data;       // dataset root (histogram scheme)
  fs::path histogram;  // existing histogram record (histogram scheme, instead of data)
  fs::path out;        // plane list; a computed histogram goes next to it as .dhst
};
void cmd_sample_planes(const RunConfig& config, const SamplePlanesArgs& args, std::ostream& log);

struct BuildVolumeArgs {
  fs::path sample;
  fs::path plane_file;
  std::size_t neighbour = 0;
  fs::path out;
};
/// Writes the warp volume as a tensor file [3(1+D), H, W].
void cmd_build_volume(const BuildVolumeArgs& args, std::ostream& log);

struct MakeMasksArgs {
  fs::path sample;
  fs::path plane_file;
  fs::path out;
};
/// Writes ground-truth masks [D, H, W]; pixels without ground truth are NaN.
void cmd_make_masks(const MakeMasksArgs& args, std::ostream& log);

struct TrainArgs {
  fs::path data;
  fs::path plane_file;
  fs::path out;
  fs::path masknet_checkpoint;  // required by the dispnet stage
  fs::path resume;
};
/// Trains one stage. Writes <out>/<stage>.ckpt, loss.log ("iteration\tloss"),
/// timing.log ("iteration\tseconds") and config.json.
void cmd_train(const RunConfig& config, const TrainArgs& args, std::ostream& log);

struct PredictArgs {
  fs::path sample;  // one sample directory, or
  fs::path data;    // a dataset root: one <id>.mmvs per manifest entry in `out`
  fs::path plane_file;
  fs::path masknet;
  fs::path dispnet;
  fs::path out;
  fs::path dump_masks;
  bool decode_from_masks = false;
  std::vector<std::size_t> use_neighbours;  // default: every neighbour
};
void cmd_predict(const RunConfig& config, const PredictArgs& args, std::ostream& log);

struct EvalArgs {
  fs::path data;
  fs::path predictions;  // directory of <id>.mmvs depth files
};
/// Prints a tab-separated metric table, one row per sample and a final mean row.
void cmd_eval(const EvalArgs& args, std::ostream& out);

struct DecodeMasksArgs {
  fs::path masks;
  fs::path plane_file;
  fs::path out;
};
void cmd_decode_masks(const DecodeMasksArgs& args, std::ostream& log);

/// Parses the command line (without the program name) and runs the chosen
/// verb. Returns the process exit code; errors are reported on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mmvs::cli
