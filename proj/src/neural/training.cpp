#include "mmvs/neural/training.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "mmvs/neural/convert.hpp"
#include "mmvs/neural/ops.hpp"

namespace mmvs::nn {

namespace {

constexpr const char* kIterationKey = "train/iteration";

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Batch {
  std::vector<const PreparedSample*> samples;
  std::vector<std::size_t> group_sizes;
  std::vector<Augmentation> augmentations;
};

// Flips every [height, width] plane of a planar array in place.
template <typename V>
void flip_planes(std::vector<V>& data, std::size_t height, std::size_t width, bool flip_x, bool flip_y) {
  const auto plane = height * width;
  for (std::size_t base = 0; base < data.size(); base += plane) {
    V* p = data.data() + base;
    if (flip_x) {
      for (std::size_t y = 0; y < height; ++y) std::reverse(p + y * width, p + (y + 1) * width);
    }
    if (flip_y) {
      for (std::size_t y = 0; y < height / 2; ++y) {
        std::swap_ranges(p + y * width, p + (y + 1) * width, p + (height - 1 - y) * width);
      }
    }
  }
}

// Permutes and scales each RGB triple among the first `groups` x 3 planes.
void recolour(std::vector<float>& data, std::size_t plane, std::size_t groups, const Augmentation& a) {
  std::vector<float> rgb(3 * plane);
  for (std::size_t g = 0; g < groups; ++g) {
    float* base = data.data() + 3 * g * plane;
    std::copy(base, base + 3 * plane, rgb.begin());
    for (std::size_t c = 0; c < 3; ++c) {
      const float* src = rgb.data() + a.channel_order[c] * plane;
      for (std::size_t i = 0; i < plane; ++i) base[c * plane + i] = std::min(1.0f, a.gain[c] * src[i]);
    }
  }
}

Batch select_batch(std::span<const PreparedSample> data, const TrainerOptions& options, std::uint64_t iteration) {
  if (data.empty()) throw std::invalid_argument("training needs at least one sample");
  Batch batch;
  for (auto i : batch_indices(data.size(), options.batch_size, options.seed, iteration)) {
    batch.samples.push_back(&data[i]);
    batch.group_sizes.push_back(data[i].volumes.size());
    batch.augmentations.push_back(options.augment
                                      ? Augmentation::draw(options.seed, iteration, batch.augmentations.size())
                                      : Augmentation{});
  }
  return batch;
}

template <typename Target>
std::vector<Target> stacked_targets(const Batch& batch, std::vector<Target> PreparedSample::*member) {
  const auto scales = (batch.samples.front()->*member).size();
  std::vector<Target> out;
  for (std::size_t s = 0; s < scales; ++s) {
    std::vector<Target> parts;
    for (std::size_t k = 0; k < batch.samples.size(); ++k) {
      parts.push_back(augment((batch.samples[k]->*member)[s], batch.augmentations[k]));
    }
    out.push_back(stack_targets(std::span<const Target>(parts)));
  }
  return out;
}

void restore_common(const Checkpoint& ckpt, ParameterStore<float>& store, AdamState<float>& adam,
                    std::uint64_t& iteration) {
  load_parameters(ckpt, store);
  load_adam(ckpt, adam, store.parameters());
  iteration = get_counter(ckpt, kIterationKey);
}

Checkpoint save_common(const ParameterStore<float>& store, const AdamState<float>& adam, std::uint64_t iteration) {
  Checkpoint ckpt;
  save_parameters(ckpt, store);
  save_adam(ckpt, adam, store.parameters());
  put_counter(ckpt, kIterationKey, iteration);
  return ckpt;
}

}  // namespace

PreparedSample prepare_sample(const std::string& id, const geometry::CameraModel& camera,
                              const geometry::ImageBuffer& reference,
                              std::span<const geometry::ImageBuffer> neighbours,
                              std::span<const geometry::RelativePose> poses, const masks::DepthMap& truth,
                              const sampling::PlaneSet& planes) {
  if (neighbours.empty() || neighbours.size() != poses.size()) {
    throw std::invalid_argument("sample " + id + ": need one pose per neighbour and at least one neighbour");
  }
  if (truth.height != reference.height || truth.width != reference.width) {
    throw std::invalid_argument("sample " + id + ": ground truth does not match the reference image");
  }
  PreparedSample p;
  p.id = id;
  p.reference = reference;
  p.truth = truth;
  for (std::size_t k = 0; k < neighbours.size(); ++k) {
    p.volumes.push_back(geometry::build_warp_volume(reference, neighbours[k], camera, poses[k], planes));
  }
  for (const auto& e : masknet_output_extents(reference.height, reference.width)) {
    p.mask_targets.push_back(pool_mask_target(truth, planes, e));
  }
  for (const auto& e : dispnet_output_extents(reference.height, reference.width)) {
    p.depth_targets.push_back(pool_inverse_depth_target(truth, e));
  }
  return p;
}

bool Augmentation::is_identity() const {
  return !flip_x && !flip_y && channel_order == std::array<std::size_t, 3>{0, 1, 2} &&
         gain == std::array<float, 3>{1.0f, 1.0f, 1.0f};
}

Augmentation Augmentation::draw(std::uint64_t seed, std::uint64_t iteration, std::size_t slot) {
  std::mt19937_64 rng(mix(mix(seed ^ 0xa06e47ULL) ^ mix(iteration)) + slot);
  Augmentation a;
  a.flip_x = (rng() & 1) != 0;
  a.flip_y = (rng() & 1) != 0;
  std::shuffle(a.channel_order.begin(), a.channel_order.end(), rng);
  std::uniform_real_distribution<float> gain(0.8f, 1.2f);
  for (auto& g : a.gain) g = gain(rng);
  return a;
}

geometry::WarpVolume augment(const geometry::WarpVolume& volume, const Augmentation& a) {
  if (a.is_identity()) return volume;
  auto out = volume;
  recolour(out.data, out.height * out.width, out.channels / 3, a);
  flip_planes(out.data, out.height, out.width, a.flip_x, a.flip_y);
  flip_planes(out.validity, out.height, out.width, a.flip_x, a.flip_y);
  return out;
}

MaskTarget augment(const MaskTarget& target, const Augmentation& a) {
  auto out = target;
  flip_planes(out.masks, out.height, out.width, a.flip_x, a.flip_y);
  flip_planes(out.valid, out.height, out.width, a.flip_x, a.flip_y);
  return out;
}

InverseDepthTarget augment(const InverseDepthTarget& target, const Augmentation& a) {
  auto out = target;
  flip_planes(out.values, out.height, out.width, a.flip_x, a.flip_y);
  flip_planes(out.valid, out.height, out.width, a.flip_x, a.flip_y);
  return out;
}

Tensor<float> augment_dispnet_input(const Tensor<float>& input, const Augmentation& a) {
  if (input.rank() != 4 || input.dim(0) != 1 || input.dim(1) < 3) {
    throw std::invalid_argument("DispNet input must be [1, 3 + D, H, W], got " + shape_string(input.shape()));
  }
  if (a.is_identity()) return input;
  std::vector<float> data(input.values().begin(), input.values().end());
  recolour(data, input.dim(2) * input.dim(3), 1, a);
  flip_planes(data, input.dim(2), input.dim(3), a.flip_x, a.flip_y);
  return Tensor<float>(input.shape(), std::move(data));
}

std::vector<std::size_t> batch_indices(std::size_t dataset_size, std::size_t batch_size, std::uint64_t seed,
                                       std::uint64_t iteration) {
  if (dataset_size == 0 || batch_size == 0) throw std::invalid_argument("empty dataset or batch");
  std::vector<std::size_t> out;
  std::vector<std::size_t> perm(dataset_size);
  std::uint64_t cached_epoch = ~std::uint64_t{0};
  const std::uint64_t first = iteration * batch_size;
  for (std::uint64_t pos = first; pos < first + batch_size; ++pos) {
    const auto epoch = pos / dataset_size;
    if (epoch != cached_epoch) {
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      std::mt19937_64 rng(mix(seed ^ mix(epoch)));
      std::shuffle(perm.begin(), perm.end(), rng);
      cached_epoch = epoch;
    }
    out.push_back(perm[pos % dataset_size]);
  }
  return out;
}

MaskNetTrainer::MaskNetTrainer(const NetworkConfig& network, const TrainerOptions& options)
    : options_(options), model_(network), adam_(make_adam_state(options.adam, model_.store().parameters())) {}

double MaskNetTrainer::step(std::span<const PreparedSample> data) {
  const auto batch = select_batch(data, options_, iteration_);
  std::vector<geometry::WarpVolume> volumes;
  for (std::size_t k = 0; k < batch.samples.size(); ++k) {
    for (const auto& v : batch.samples[k]->volumes) volumes.push_back(augment(v, batch.augmentations[k]));
  }
  const auto input = stack_volumes<float>(volumes);
  const auto targets = stacked_targets(batch, &PreparedSample::mask_targets);

  auto& store = model_.store();
  store.zero_grad();
  const auto outputs = model_.forward(input, true);
  const auto loss = mask_pyramid_loss<float>(outputs, batch.group_sizes, targets);
  const double value = loss.total.item();
  backward(loss.total);
  adam_step<float>(store.parameters(), adam_);
  ++iteration_;
  return value;
}

Checkpoint MaskNetTrainer::checkpoint() const { return save_common(model_.store(), adam_, iteration_); }

void MaskNetTrainer::restore(const Checkpoint& ckpt) { restore_common(ckpt, model_.store(), adam_, iteration_); }

DispNetTrainer::DispNetTrainer(const NetworkConfig& network, const TrainerOptions& options,
                               const Checkpoint& masknet)
    : options_(options),
      masknet_(network),
      model_(network),
      adam_(make_adam_state(options.adam, model_.store().parameters())) {
  load_parameters(masknet, masknet_.store());
}

const Tensor<float>& DispNetTrainer::input_for(const PreparedSample& sample) {
  for (const auto& [key, tensor] : input_cache_) {
    if (key == &sample) return tensor;
  }
  const auto fused = predict_fused_masks(masknet_, sample.volumes);
  input_cache_.emplace_back(&sample, dispnet_input(sample.reference, fused));
  return input_cache_.back().second;
}

double DispNetTrainer::step(std::span<const PreparedSample> data) {
  const auto batch = select_batch(data, options_, iteration_);
  std::vector<Tensor<float>> rows;
  for (std::size_t k = 0; k < batch.samples.size(); ++k) {
    rows.push_back(augment_dispnet_input(input_for(*batch.samples[k]), batch.augmentations[k]));
  }
  Tensor<float> input;
  {
    NoGradGuard guard;
    const auto c = rows.front().dim(1), h = rows.front().dim(2), w = rows.front().dim(3);
    std::vector<float> data_rows;
    for (const auto& r : rows) data_rows.insert(data_rows.end(), r.values().begin(), r.values().end());
    input = Tensor<float>({rows.size(), c, h, w}, std::move(data_rows));
  }
  const auto targets = stacked_targets(batch, &PreparedSample::depth_targets);

  auto& store = model_.store();
  store.zero_grad();
  const auto outputs = model_.forward(input, true);
  const auto loss = multiscale_l1_loss<float>(outputs, targets, model_.config().loss_weights);
  const double value = loss.total.item();
  backward(loss.total);
  adam_step<float>(store.parameters(), adam_);
  ++iteration_;
  return value;
}

Checkpoint DispNetTrainer::checkpoint() const { return save_common(model_.store(), adam_, iteration_); }

void DispNetTrainer::restore(const Checkpoint& ckpt) { restore_common(ckpt, model_.store(), adam_, iteration_); }

masks::MultiplaneMask predict_fused_masks(MaskNet<float>& model, std::span<const geometry::WarpVolume> volumes) {
  NoGradGuard guard;
  const auto outputs = model.forward(stack_volumes<float>(volumes), false);
  const std::array<std::size_t, 1> group{volumes.size()};
  return mask_from_tensor(group_mean(outputs.back(), std::span<const std::size_t>(group)), 0);
}

Tensor<float> dispnet_input(const geometry::ImageBuffer& reference, const masks::MultiplaneMask& fused) {
  if (reference.channels != 3 || reference.height != fused.height || reference.width != fused.width) {
    throw std::invalid_argument("DispNet input: reference RGB and fused masks must share H x W");
  }
  std::vector<float> data(reference.data.begin(), reference.data.end());
  data.insert(data.end(), fused.values.begin(), fused.values.end());
  return Tensor<float>({1, 3 + fused.planes, fused.height, fused.width}, std::move(data));
}

Tensor<float> predict_inverse_depth(DispNet<float>& model, const geometry::ImageBuffer& reference,
                                    const masks::MultiplaneMask& fused) {
  NoGradGuard guard;
  return model.forward(dispnet_input(reference, fused), false).back();
}

double fused_mask_bce(MaskNet<float>& model, const PreparedSample& sample) {
  auto fused = predict_fused_masks(model, sample.volumes);
  const auto& target = sample.mask_targets.back();
  masks::MultiplaneMask truth;
  truth.planes = target.planes;
  truth.height = target.height;
  truth.width = target.width;
  truth.values = target.masks;
  truth.validity = target.valid;
  return bce_mask_loss(fused, truth);
}

}  // namespace mmvs::nn
