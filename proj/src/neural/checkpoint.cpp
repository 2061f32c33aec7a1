#include "mmvs/neural/checkpoint.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mmvs/io/binary.hpp"
#include "mmvs/io/tensor_file.hpp"

namespace mmvs::nn {

namespace {

constexpr std::string_view kMagic = "MMVSCKPT";
constexpr std::uint64_t kCounterLimit = std::uint64_t{1} << 24;

template <typename T>
std::vector<float> to_float(std::span<const T> values) {
  return std::vector<float>(values.begin(), values.end());
}

template <typename T>
void copy_into(const Checkpoint& ckpt, const std::string& name, const Shape& shape, std::span<T> dst) {
  const auto& e = ckpt.get(name);
  if (e.shape != shape) {
    throw std::runtime_error("checkpoint tensor '" + name + "' has shape " + shape_string(e.shape) + ", expected " +
                             shape_string(shape));
  }
  std::copy(e.values.begin(), e.values.end(), dst.begin());
}

}  // namespace

void Checkpoint::put(const std::string& name, Shape shape, std::vector<float> values) {
  if (name.empty()) throw std::invalid_argument("checkpoint tensor needs a name");
  if (shape.size() > 255) throw std::invalid_argument("checkpoint tensor rank too large: " + name);
  if (shape_numel(shape) != values.size()) {
    throw std::invalid_argument("checkpoint tensor '" + name + "' values do not match shape " + shape_string(shape));
  }
  entries_[name] = Entry{std::move(shape), std::move(values)};
}

const Checkpoint::Entry& Checkpoint::get(const std::string& name) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) throw std::runtime_error("checkpoint has no tensor '" + name + "'");
  return it->second;
}

std::vector<std::uint8_t> Checkpoint::encode() const {
  io::ByteWriter w;
  w.put_raw(kMagic);
  w.put_u8(kCheckpointVersion);
  w.put_u32(static_cast<std::uint32_t>(entries_.size()));
  std::uint64_t offset = 0;
  for (const auto& [name, e] : entries_) {
    w.put_u32(static_cast<std::uint32_t>(name.size()));
    w.put_raw(name);
    w.put_u8(static_cast<std::uint8_t>(e.shape.size()));
    for (auto d : e.shape) w.put_u32(static_cast<std::uint32_t>(d));
    w.put_u64(offset);
    offset += 4 * e.values.size();
  }
  for (const auto& [name, e] : entries_) {
    for (float v : e.values) w.put_f32(v);
  }
  return w.release();
}

Checkpoint Checkpoint::decode(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  if (r.remaining() < kMagic.size() || r.get_raw(kMagic.size()) != kMagic) {
    throw std::runtime_error("not a checkpoint (bad magic)");
  }
  const auto version = r.get_u8();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = r.get_u32();
  struct Header {
    std::string name;
    Shape shape;
    std::uint64_t offset;
  };
  std::vector<Header> headers;
  std::uint64_t expected_offset = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    Header h;
    h.name = r.get_raw(r.get_u32());
    const auto rank = r.get_u8();
    for (std::uint8_t k = 0; k < rank; ++k) h.shape.push_back(r.get_u32());
    h.offset = r.get_u64();
    if (h.offset != expected_offset) throw std::runtime_error("checkpoint entry '" + h.name + "' has a bad offset");
    expected_offset += 4 * shape_numel(h.shape);
    headers.push_back(std::move(h));
  }
  if (r.remaining() != expected_offset) throw std::runtime_error("checkpoint blob section has the wrong length");
  Checkpoint ckpt;
  for (auto& h : headers) {
    std::vector<float> values(shape_numel(h.shape));
    for (auto& v : values) v = r.get_f32();
    if (ckpt.contains(h.name)) throw std::runtime_error("duplicate checkpoint entry '" + h.name + "'");
    ckpt.put(h.name, std::move(h.shape), std::move(values));
  }
  return ckpt;
}

void Checkpoint::save(const std::filesystem::path& path) const { io::write_bytes(path, encode()); }

Checkpoint Checkpoint::load(const std::filesystem::path& path) { return decode(io::read_bytes(path)); }

void put_counter(Checkpoint& ckpt, const std::string& name, std::uint64_t value) {
  if (value >= kCounterLimit) throw std::invalid_argument("counter too large to store exactly: " + name);
  ckpt.put(name, {1}, {static_cast<float>(value)});
}

std::uint64_t get_counter(const Checkpoint& ckpt, const std::string& name) {
  const auto& e = ckpt.get(name);
  if (e.values.size() != 1 || !(e.values[0] >= 0.0f) || std::floor(e.values[0]) != e.values[0]) {
    throw std::runtime_error("checkpoint counter '" + name + "' is malformed");
  }
  return static_cast<std::uint64_t>(e.values[0]);
}

template <typename T>
void save_parameters(Checkpoint& ckpt, const ParameterStore<T>& store) {
  for (const auto& p : store.parameters()) ckpt.put("param/" + p.name, p.tensor.shape(), to_float(p.tensor.values()));
  for (const auto& b : store.buffers()) ckpt.put("buffer/" + b.name, b.tensor.shape(), to_float(b.tensor.values()));
}

template <typename T>
void load_parameters(const Checkpoint& ckpt, ParameterStore<T>& store) {
  for (const auto& p : store.parameters()) {
    auto t = p.tensor;
    copy_into<T>(ckpt, "param/" + p.name, t.shape(), t.mutable_values());
  }
  for (const auto& b : store.buffers()) {
    auto t = b.tensor;
    copy_into<T>(ckpt, "buffer/" + b.name, t.shape(), t.mutable_values());
  }
}

template <typename T>
void save_adam(Checkpoint& ckpt, const AdamState<T>& state, std::span<const NamedTensor<T>> params) {
  if (state.first_moment.size() != params.size()) throw std::invalid_argument("adam state does not match parameters");
  for (std::size_t k = 0; k < params.size(); ++k) {
    ckpt.put("adam/m/" + params[k].name, params[k].tensor.shape(), to_float<T>(state.first_moment[k]));
    ckpt.put("adam/v/" + params[k].name, params[k].tensor.shape(), to_float<T>(state.second_moment[k]));
  }
  put_counter(ckpt, "adam/step", state.step);
}

template <typename T>
void load_adam(const Checkpoint& ckpt, AdamState<T>& state, std::span<const NamedTensor<T>> params) {
  state.first_moment.resize(params.size());
  state.second_moment.resize(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& shape = params[k].tensor.shape();
    state.first_moment[k].assign(params[k].tensor.numel(), T(0));
    state.second_moment[k].assign(params[k].tensor.numel(), T(0));
    copy_into<T>(ckpt, "adam/m/" + params[k].name, shape, state.first_moment[k]);
    copy_into<T>(ckpt, "adam/v/" + params[k].name, shape, state.second_moment[k]);
  }
  state.step = get_counter(ckpt, "adam/step");
}

template void save_parameters(Checkpoint&, const ParameterStore<float>&);
template void save_parameters(Checkpoint&, const ParameterStore<double>&);
template void load_parameters(const Checkpoint&, ParameterStore<float>&);
template void load_parameters(const Checkpoint&, ParameterStore<double>&);
template void save_adam(Checkpoint&, const AdamState<float>&, std::span<const NamedTensor<float>>);
template void save_adam(Checkpoint&, const AdamState<double>&, std::span<const NamedTensor<double>>);
template void load_adam(const Checkpoint&, AdamState<float>&, std::span<const NamedTensor<float>>);
template void load_adam(const Checkpoint&, AdamState<double>&, std::span<const NamedTensor<double>>);

}  // namespace mmvs::nn
