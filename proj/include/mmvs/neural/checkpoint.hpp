#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mmvs/neural/adam.hpp"
#include "mmvs/neural/layers.hpp"

namespace mmvs::nn {

/// Named float32 tensors persisted as one file.
///
/// Layout: magic "MMVSCKPT", a version byte, a u32 entry count, then per
/// entry (in name order) a u32 name length, the name, a u8 rank, rank u32
/// dims and the u64 byte offset of its data inside the blob section, then
/// the blob section of little-endian float32 values. Integers are
/// little-endian.
class Checkpoint {
 public:
  struct Entry {
    Shape shape;
    std::vector<float> values;
  };

  void put(const std::string& name, Shape shape, std::vector<float> values);
  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  /// Throws naming the tensor when it is absent.
  const Entry& get(const std::string& name) const;
  const std::map<std::string, Entry>& entries() const { return entries_; }

  std::vector<std::uint8_t> encode() const;
  static Checkpoint decode(std::span<const std::uint8_t> bytes);
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

 private:
  std::map<std::string, Entry> entries_;
};

inline constexpr std::uint8_t kCheckpointVersion = 1;

/// Parameters go under "param/", buffers under "buffer/".
template <typename T>
void save_parameters(Checkpoint& ckpt, const ParameterStore<T>& store);

/// Copies every parameter and buffer of `store` from the checkpoint. Throws
/// naming the tensor when one is missing or its shape differs.
template <typename T>
void load_parameters(const Checkpoint& ckpt, ParameterStore<T>& store);

/// Moments go under "adam/m/" and "adam/v/", the step count under "adam/step".
template <typename T>
void save_adam(Checkpoint& ckpt, const AdamState<T>& state, std::span<const NamedTensor<T>> params);

template <typename T>
void load_adam(const Checkpoint& ckpt, AdamState<T>& state, std::span<const NamedTensor<T>> params);

/// Counters are stored as float32 and must stay below 2^24.
void put_counter(Checkpoint& ckpt, const std::string& name, std::uint64_t value);
std::uint64_t get_counter(const Checkpoint& ckpt, const std::string& name);

}  // namespace mmvs::nn
