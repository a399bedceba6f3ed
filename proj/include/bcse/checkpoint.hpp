/* Copyright 2026 The bcse Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Checkpoint layout, little-endian throughout:
//
//   "BCSE"  u32 version
//   u32 n   { str key, str value } * n            model config
//   u32 n   { str name, u32 rank, u32 extent * rank, f32 * numel } * n
//   u8 has_optimizer
//     [ str kind, u64 step, u32 n, tensors as above ]
//   u32 crc32 of every preceding byte
//
// str is a u32 byte count followed by the bytes.

#ifndef BCSE_CHECKPOINT_HPP_
#define BCSE_CHECKPOINT_HPP_

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bcse/audio.hpp"
#include "bcse/model.hpp"
#include "bcse/optim.hpp"

namespace bcse {

inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) { put_le32(bytes_, v); }
  void u64(std::uint64_t v) {
    u32(static_cast<std::uint32_t>(v));
    u32(static_cast<std::uint32_t>(v >> 32));
  }
  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  template <typename T>
  void tensor(const std::string& name, const Shape& shape, std::span<const T> data) {
    str(name);
    u32(static_cast<std::uint32_t>(shape.size()));
    for (std::size_t e : shape) u32(static_cast<std::uint32_t>(e));
    for (T v : data) f32(static_cast<float>(v));
  }
  std::vector<unsigned char>& bytes() { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class ByteReader {
 public:
  ByteReader(const unsigned char* data, std::size_t size) : p_(data), end_(data + size) {}

  std::uint8_t u8() {
    need(1);
    return *p_++;
  }
  std::uint32_t u32() {
    need(4);
    const std::uint32_t v = read_le32(p_);
    p_ += 4;
    return v;
  }
  std::uint64_t u64() {
    const std::uint64_t lo = u32();
    return lo | static_cast<std::uint64_t>(u32()) << 32;
  }
  float f32() {
    const std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(p_), n);
    p_ += n;
    return s;
  }
  bool done() const { return p_ == end_; }

 private:
  void need(std::size_t n) const {
    if (static_cast<std::size_t>(end_ - p_) < n) throw Error(Errc::corrupt_checkpoint, "unexpected end of data");
  }
  const unsigned char* p_;
  const unsigned char* end_;
};

struct StoredTensor {
  Shape shape;
  std::vector<float> data;
};

inline std::map<std::string, StoredTensor> read_tensor_block(ByteReader& r) {
  std::map<std::string, StoredTensor> out;
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::string name = r.str();
    StoredTensor t;
    const std::uint32_t rank = r.u32();
    if (rank > 8) throw Error(Errc::corrupt_checkpoint, "implausible rank for " + name);
    for (std::uint32_t k = 0; k < rank; ++k) t.shape.push_back(r.u32());
    t.data.resize(shape_numel(t.shape));
    for (float& v : t.data) v = r.f32();
    out.emplace(name, std::move(t));
  }
  return out;
}

inline std::uint32_t crc32_of(const unsigned char* data, std::size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(crc32(crc, data, static_cast<uInt>(size)));
}

}  // namespace detail

template <typename T>
std::vector<unsigned char> encode_checkpoint(BcSeNet<T>& model, const OptimizerState<T>* optim = nullptr) {
  detail::ByteWriter w;
  for (char c : std::string("BCSE")) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kCheckpointVersion);
  const auto kv = model.config().to_kv();
  w.u32(static_cast<std::uint32_t>(kv.size()));
  for (const auto& [k, v] : kv) {
    w.str(k);
    w.str(v);
  }
  std::vector<std::pair<std::string, Tensor<T>>> tensors;
  model.for_each_param([&](const std::string& name, Tensor<T>& t, bool) { tensors.emplace_back(name, t); });
  model.for_each_buffer([&](const std::string& name, Tensor<T>& t) { tensors.emplace_back(name, t); });
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) w.tensor<T>(name, t.shape(), t.data());
  if (optim != nullptr && !optim->first.empty()) {
    w.u8(1);
    w.str(to_string(optim->kind));
    w.u64(optim->step);
    const auto params = model.parameters();
    const bool adam = optim->kind == OptimKind::adam;
    w.u32(static_cast<std::uint32_t>(params.size() * (adam ? 2 : 1)));
    for (std::size_t i = 0; i < params.size(); ++i) {
      w.tensor<T>(params[i].name + ".first", params[i].tensor.shape(), optim->first.at(i));
      if (adam) w.tensor<T>(params[i].name + ".second", params[i].tensor.shape(), optim->second.at(i));
    }
  } else {
    w.u8(0);
  }
  const std::uint32_t crc = detail::crc32_of(w.bytes().data(), w.bytes().size());
  w.u32(crc);
  return std::move(w.bytes());
}

template <typename T>
void save_checkpoint(BcSeNet<T>& model, const OptimizerState<T>* optim, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(model, optim);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

template <typename T>
struct LoadedCheckpoint {
  BcSeNet<T> model;
  std::optional<OptimizerState<T>> optim;
};

// The model is rebuilt from the config stored in the file.
template <typename T = float>
LoadedCheckpoint<T> decode_checkpoint(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 12) throw Error(Errc::corrupt_checkpoint, "file too short");
  if (std::memcmp(bytes.data(), "BCSE", 4) != 0) throw Error(Errc::corrupt_checkpoint, "bad magic");
  const std::uint32_t stored_crc = detail::read_le32(bytes.data() + bytes.size() - 4);
  if (detail::crc32_of(bytes.data(), bytes.size() - 4) != stored_crc)
    throw Error(Errc::corrupt_checkpoint, "checksum mismatch");
  detail::ByteReader r(bytes.data() + 4, bytes.size() - 8);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw Error(Errc::corrupt_checkpoint, "unsupported version " + std::to_string(version));
  std::vector<std::pair<std::string, std::string>> kv;
  const std::uint32_t n_kv = r.u32();
  for (std::uint32_t i = 0; i < n_kv; ++i) {
    std::string k = r.str();
    kv.emplace_back(std::move(k), r.str());
  }
  LoadedCheckpoint<T> out{BcSeNet<T>(ModelConfig::from_kv(kv)), std::nullopt};
  auto stored = detail::read_tensor_block(r);
  auto restore = [&](const std::string& name, Tensor<T>& t) {
    const auto it = stored.find(name);
    if (it == stored.end()) throw Error(Errc::incomplete_checkpoint, "missing tensor '" + name + "'");
    if (it->second.shape != t.shape())
      throw Error(Errc::corrupt_checkpoint, "tensor '" + name + "' has shape " + shape_str(it->second.shape) +
                                                ", model expects " + shape_str(t.shape()));
    auto dst = t.mutable_data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<T>(it->second.data[i]);
  };
  out.model.for_each_param([&](const std::string& name, Tensor<T>& t, bool) { restore(name, t); });
  out.model.for_each_buffer(restore);
  if (r.u8() != 0) {
    OptimizerState<T> st;
    const std::string kind = r.str();
    if (kind == "adam") st.kind = OptimKind::adam;
    else if (kind == "sgd_momentum") st.kind = OptimKind::sgd_momentum;
    else throw Error(Errc::corrupt_checkpoint, "unknown optimizer kind '" + kind + "'");
    st.step = r.u64();
    auto buffers = detail::read_tensor_block(r);
    const auto params = out.model.parameters();
    auto take = [&](const std::string& name, const NamedParam<T>& p) {
      const auto it = buffers.find(name);
      if (it == buffers.end()) throw Error(Errc::incomplete_checkpoint, "missing optimizer tensor '" + name + "'");
      if (it->second.data.size() != p.tensor.numel())
        throw Error(Errc::corrupt_checkpoint, "optimizer tensor '" + name + "' has the wrong size");
      return std::vector<T>(it->second.data.begin(), it->second.data.end());
    };
    for (const auto& p : params) {
      st.first.push_back(take(p.name + ".first", p));
      if (st.kind == OptimKind::adam) st.second.push_back(take(p.name + ".second", p));
    }
    out.optim = std::move(st);
  }
  if (!r.done()) throw Error(Errc::corrupt_checkpoint, "trailing bytes after payload");
  return out;
}

template <typename T = float>
LoadedCheckpoint<T> load_checkpoint(const std::filesystem::path& path) {
  std::vector<unsigned char> bytes;
  try {
    bytes = detail::read_file(path);
  } catch (const Error&) {
    throw Error(Errc::io, std::string("cannot open checkpoint ") + path.string());
  }
  return decode_checkpoint<T>(bytes);
}

}  // namespace bcse

#endif  // BCSE_CHECKPOINT_HPP_
