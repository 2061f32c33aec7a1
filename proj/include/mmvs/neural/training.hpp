#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mmvs/geometry/camera.hpp"
#include "mmvs/geometry/image.hpp"
#include "mmvs/geometry/warp.hpp"
#include "mmvs/masks/depth_map.hpp"
#include "mmvs/masks/multiplane_mask.hpp"
#include "mmvs/neural/adam.hpp"
#include "mmvs/neural/checkpoint.hpp"
#include "mmvs/neural/dispnet.hpp"
#include "mmvs/neural/losses.hpp"
#include "mmvs/neural/masknet.hpp"
#include "mmvs/sampling/planes.hpp"

namespace mmvs::nn {

/// Everything a training step needs from one sample, computed once.
struct PreparedSample {
  std::string id;
  geometry::ImageBuffer reference;
  std::vector<geometry::WarpVolume> volumes;         // one per neighbour
  masks::DepthMap truth;
  std::vector<MaskTarget> mask_targets;              // coarse to fine
  std::vector<InverseDepthTarget> depth_targets;     // coarse to fine
};

PreparedSample prepare_sample(const std::string& id, const geometry::CameraModel& camera,
                              const geometry::ImageBuffer& reference,
                              std::span<const geometry::ImageBuffer> neighbours,
                              std::span<const geometry::RelativePose> poses, const masks::DepthMap& truth,
                              const sampling::PlaneSet& planes);

/// Sample indices of the mini-batch at `iteration`. Samples are drawn from a
/// stream of per-epoch permutations seeded by (seed, epoch), so any
/// iteration's batch is known without replaying earlier ones.
std::vector<std::size_t> batch_indices(std::size_t dataset_size, std::size_t batch_size, std::uint64_t seed,
                                       std::uint64_t iteration);

/// Label-preserving training transform: mirror flips, an RGB channel
/// permutation and per-channel gains, applied alike to the reference and to
/// every warped plane so photo-consistency and the targets stay valid.
struct Augmentation {
  bool flip_x = false;
  bool flip_y = false;
  std::array<std::size_t, 3> channel_order{0, 1, 2};
  std::array<float, 3> gain{1.0f, 1.0f, 1.0f};

  bool is_identity() const;
  /// Deterministic draw for one batch slot of one iteration.
  static Augmentation draw(std::uint64_t seed, std::uint64_t iteration, std::size_t slot);
};

geometry::WarpVolume augment(const geometry::WarpVolume& volume, const Augmentation& a);
MaskTarget augment(const MaskTarget& target, const Augmentation& a);
InverseDepthTarget augment(const InverseDepthTarget& target, const Augmentation& a);
/// Reference channels come first, mask channels follow.
Tensor<float> augment_dispnet_input(const Tensor<float>& input, const Augmentation& a);

struct TrainerOptions {
  AdamConfig adam;
  std::size_t batch_size = 4;
  std::uint64_t seed = 1;
  bool augment = true;
};

/// First stage: MaskNet on warp volumes against ground-truth masks.
class MaskNetTrainer {
 public:
  MaskNetTrainer(const NetworkConfig& network, const TrainerOptions& options);

  /// One optimisation step; returns the objective before the update.
  double step(std::span<const PreparedSample> data);
  std::uint64_t iteration() const { return iteration_; }

  Checkpoint checkpoint() const;
  void restore(const Checkpoint& ckpt);

  MaskNet<float>& model() { return model_; }

 private:
  TrainerOptions options_;
  MaskNet<float> model_;
  AdamState<float> adam_;
  std::uint64_t iteration_ = 0;
};

/// Second stage: DispNet on reference RGB plus fused masks from a frozen
/// MaskNet evaluated in inference mode.
class DispNetTrainer {
 public:
  DispNetTrainer(const NetworkConfig& network, const TrainerOptions& options, const Checkpoint& masknet);

  /// One optimisation step; returns the objective before the update.
  double step(std::span<const PreparedSample> data);
  std::uint64_t iteration() const { return iteration_; }

  Checkpoint checkpoint() const;
  void restore(const Checkpoint& ckpt);

  DispNet<float>& model() { return model_; }
  MaskNet<float>& masknet() { return masknet_; }

 private:
  const Tensor<float>& input_for(const PreparedSample& sample);

  TrainerOptions options_;
  MaskNet<float> masknet_;
  DispNet<float> model_;
  AdamState<float> adam_;
  std::uint64_t iteration_ = 0;
  std::vector<std::pair<const PreparedSample*, Tensor<float>>> input_cache_;
};

/// Fused finest-scale masks for one reference view (inference mode).
masks::MultiplaneMask predict_fused_masks(MaskNet<float>& model, std::span<const geometry::WarpVolume> volumes);

/// [1, 3 + D, H, W] DispNet input: reference RGB then the fused masks.
Tensor<float> dispnet_input(const geometry::ImageBuffer& reference, const masks::MultiplaneMask& fused);

/// Finest inverse-depth prediction [1, 1, H, W] (inference mode).
Tensor<float> predict_inverse_depth(DispNet<float>& model, const geometry::ImageBuffer& reference,
                                    const masks::MultiplaneMask& fused);

/// Finest-scale cross-entropy of the fused prediction against the sample's
/// ground-truth masks (inference mode).
double fused_mask_bce(MaskNet<float>& model, const PreparedSample& sample);

}  // namespace mmvs::nn
