// Copyright 2026 The PTAL Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ptal/checkpoint.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "ptal/error.h"

namespace ptal::nn {
namespace {

template <typename T>
T ToLittleEndian(T value) {
  if constexpr (std::endian::native == std::endian::little) {
    return value;
  } else {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
      std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    }
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }
}

class Writer {
 public:
  template <typename T>
  void Put(T value) {
    value = ToLittleEndian(value);
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    out_.append(bytes, sizeof(T));
  }
  void PutDouble(double value) { Put(std::bit_cast<std::uint64_t>(value)); }
  void PutString(std::string_view s) {
    Put(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void PutRaw(std::string_view s) { out_.append(s); }
  std::string Take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  template <typename T>
  T Get() {
    Need(sizeof(T));
    T value;
    std::memcpy(&value, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return ToLittleEndian(value);
  }
  double GetDouble() { return std::bit_cast<double>(Get<std::uint64_t>()); }
  std::string GetString() {
    const auto len = Get<std::uint32_t>();
    return std::string(GetRaw(len));
  }
  std::string_view GetRaw(std::size_t len) {
    Need(len);
    std::string_view s = in_.substr(pos_, len);
    pos_ += len;
    return s;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void Need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw FormatError("checkpoint is truncated");
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

const Network& Checkpoint::Get(std::string_view name) const {
  for (const auto& [key, net] : networks) {
    if (key == name) return net;
  }
  throw FormatError("checkpoint has no network named '" + std::string(name) +
                    "'");
}

std::string EncodeCheckpoint(const Checkpoint& checkpoint) {
  Writer w;
  w.PutRaw(kCheckpointMagic);
  w.Put(static_cast<std::uint32_t>(checkpoint.networks.size()));
  for (const auto& [name, net] : checkpoint.networks) {
    w.PutString(name);
    w.Put(static_cast<std::uint32_t>(net.layers().size()));
    for (const LayerSpec& layer : net.layers()) {
      w.Put(static_cast<std::uint8_t>(layer.kind));
      w.Put(static_cast<std::uint8_t>(layer.activation));
      w.Put(static_cast<std::uint8_t>(layer.trainable ? 1 : 0));
      w.Put(std::uint8_t{0});
      w.Put(static_cast<std::int32_t>(layer.in_dim));
      w.Put(static_cast<std::int32_t>(layer.out_dim));
      w.Put(static_cast<std::int32_t>(layer.kernel));
    }
    w.Put(static_cast<std::uint64_t>(net.seed()));
    w.Put(static_cast<std::uint64_t>(net.num_params()));
    for (double p : net.params()) w.PutDouble(p);
  }
  w.PutString(checkpoint.metadata);
  return w.Take();
}

Checkpoint DecodeCheckpoint(std::string_view bytes) {
  Reader r(bytes);
  if (bytes.size() < kCheckpointMagic.size() ||
      r.GetRaw(kCheckpointMagic.size()) != kCheckpointMagic) {
    throw FormatError("not a PTALNET1 checkpoint (bad magic)");
  }
  Checkpoint checkpoint;
  const auto count = r.Get<std::uint32_t>();
  for (std::uint32_t n = 0; n < count; ++n) {
    std::string name = r.GetString();
    const auto num_layers = r.Get<std::uint32_t>();
    if (num_layers > r.remaining() / 16) {
      throw FormatError("checkpoint is truncated");
    }
    std::vector<LayerSpec> layers;
    for (std::uint32_t l = 0; l < num_layers; ++l) {
      LayerSpec layer;
      const auto kind = r.Get<std::uint8_t>();
      const auto activation = r.Get<std::uint8_t>();
      const auto trainable = r.Get<std::uint8_t>();
      r.Get<std::uint8_t>();
      if (kind > static_cast<std::uint8_t>(LayerKind::kMeanPool) ||
          activation > static_cast<std::uint8_t>(Activation::kSoftmax)) {
        throw FormatError("checkpoint has an unknown layer kind/activation");
      }
      layer.kind = static_cast<LayerKind>(kind);
      layer.activation = static_cast<Activation>(activation);
      layer.trainable = trainable != 0;
      layer.in_dim = r.Get<std::int32_t>();
      layer.out_dim = r.Get<std::int32_t>();
      layer.kernel = r.Get<std::int32_t>();
      layers.push_back(layer);
    }
    const auto seed = r.Get<std::uint64_t>();
    const auto param_count = r.Get<std::uint64_t>();
    if (param_count > r.remaining() / sizeof(double)) {
      throw FormatError("checkpoint is truncated");
    }
    std::vector<double> params(param_count);
    for (double& p : params) p = r.GetDouble();
    try {
      checkpoint.networks.emplace_back(
          std::move(name),
          Network::FromParams(std::move(layers), std::move(params), seed));
    } catch (const Error& e) {
      throw FormatError(std::string("checkpoint size mismatch: ") + e.what());
    }
  }
  checkpoint.metadata = r.GetString();
  if (r.remaining() != 0) throw FormatError("checkpoint has trailing bytes");
  return checkpoint;
}

void SaveCheckpoint(const std::filesystem::path& path,
                    const Checkpoint& checkpoint) {
  const std::string bytes = EncodeCheckpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing " + path.string());
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  try {
    return DecodeCheckpoint(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace ptal::nn
