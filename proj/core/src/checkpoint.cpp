// Copyright 2026 The cgvo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cgvo/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cgvo/error.hpp"

namespace cgvo {
namespace {

constexpr char kMagic[8] = {'C', 'G', 'V', 'O', 'C', 'K', 'P', 'T'};

template <typename U>
void put_le(std::ostream& os, U v) {
  unsigned char b[sizeof(U)];
  if constexpr (std::is_floating_point_v<U>) {
    using Bits = std::conditional_t<sizeof(U) == 4, std::uint32_t, std::uint64_t>;
    const Bits bits = std::bit_cast<Bits>(v);
    for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  } else {
    for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  }
  os.write(reinterpret_cast<const char*>(b), sizeof(U));
}

class Reader {
 public:
  Reader(std::istream& is, std::string origin) : is_(is), origin_(std::move(origin)) {}

  template <typename U>
  U get() {
    unsigned char b[sizeof(U)];
    read(b, sizeof(U));
    if constexpr (std::is_floating_point_v<U>) {
      using Bits = std::conditional_t<sizeof(U) == 4, std::uint32_t, std::uint64_t>;
      Bits bits = 0;
      for (std::size_t i = 0; i < sizeof(U); ++i) bits |= Bits(b[i]) << (8 * i);
      return std::bit_cast<U>(bits);
    } else {
      U v = 0;
      for (std::size_t i = 0; i < sizeof(U); ++i) v |= U(b[i]) << (8 * i);
      return v;
    }
  }

  std::string bytes(std::size_t n) {
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }

  void read(void* dst, std::size_t n) {
    is_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (!is_) throw CheckpointError(origin_ + ": truncated checkpoint");
  }

 private:
  std::istream& is_;
  std::string origin_;
};

}  // namespace

const StoredTensor* Checkpoint::find(std::string_view name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

std::string Checkpoint::meta(std::string_view key, std::string_view fallback) const {
  auto it = metadata.find(std::string(key));
  return it == metadata.end() ? std::string(fallback) : it->second;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write checkpoint " + path.string());
  os.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(os, kCheckpointVersion);
  std::string meta;
  for (const auto& [k, v] : ckpt.metadata) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos)
      throw CheckpointError("metadata key/value contains a separator: " + k);
    meta += k + "=" + v + "\n";
  }
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(meta.size()));
  os.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    if (t.values.size() != nn::element_count(t.shape))
      throw CheckpointError("tensor " + t.name + " value count does not match its shape");
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.name.size()));
    os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put_le<std::uint8_t>(os, static_cast<std::uint8_t>(t.dtype));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) put_le<std::uint64_t>(os, d);
    if (t.dtype == DType::kFloat32)
      for (double v : t.values) put_le<float>(os, static_cast<float>(v));
    else
      for (double v : t.values) put_le<double>(os, v);
  }
  if (!os) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read checkpoint " + path.string());
  Reader r(is, path.string());
  char magic[8];
  r.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw CheckpointError(path.string() + ": not a checkpoint (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw CheckpointError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  std::istringstream meta(r.bytes(r.get<std::uint32_t>()));
  for (std::string line; std::getline(meta, line);) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw CheckpointError(path.string() + ": malformed metadata line");
    ckpt.metadata[line.substr(0, eq)] = line.substr(eq + 1);
  }
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    StoredTensor t;
    t.name = r.bytes(r.get<std::uint32_t>());
    const auto dtype = r.get<std::uint8_t>();
    if (dtype != 1 && dtype != 2) throw CheckpointError(path.string() + ": bad dtype for " + t.name);
    t.dtype = static_cast<DType>(dtype);
    const auto rank = r.get<std::uint32_t>();
    if (rank > 8) throw CheckpointError(path.string() + ": implausible rank for " + t.name);
    for (std::uint32_t d = 0; d < rank; ++d) t.shape.push_back(static_cast<std::size_t>(r.get<std::uint64_t>()));
    t.values.resize(nn::element_count(t.shape));
    if (t.dtype == DType::kFloat32)
      for (double& v : t.values) v = r.get<float>();
    else
      for (double& v : t.values) v = r.get<double>();
    ckpt.tensors.push_back(std::move(t));
  }
  return ckpt;
}

template <typename T>
void store_parameters(Checkpoint& ckpt, const ParameterSet<T>& params, std::string_view prefix) {
  for (const auto& [name, t] : params) {
    StoredTensor s;
    s.name = std::string(prefix) + name;
    s.shape = t->shape();
    s.dtype = sizeof(T) == 4 ? DType::kFloat32 : DType::kFloat64;
    s.values.assign(t->values().begin(), t->values().end());
    ckpt.tensors.push_back(std::move(s));
  }
}

template <typename T>
void restore_parameters(ParameterSet<T>& params, const Checkpoint& ckpt, std::string_view prefix,
                        std::string_view only) {
  std::vector<std::string> problems;
  for (const auto& [name, t] : params) {
    if (!only.empty() && !name.starts_with(only)) continue;
    const StoredTensor* s = ckpt.find(std::string(prefix) + name);
    if (!s)
      problems.push_back(name + " (missing)");
    else if (s->shape != t->shape())
      problems.push_back(name + " (checkpoint " + nn::to_string(s->shape) + ", model " +
                         nn::to_string(t->shape()) + ")");
  }
  if (!problems.empty()) {
    std::string msg = "checkpoint does not match model:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw CheckpointError(msg);
  }
  for (const auto& [name, t] : params) {
    if (!only.empty() && !name.starts_with(only)) continue;
    const StoredTensor* s = ckpt.find(std::string(prefix) + name);
    for (std::size_t i = 0; i < t->size(); ++i) (*t)[i] = static_cast<T>(s->values[i]);
  }
}

template <typename T>
Checkpoint make_model_checkpoint(const PoseModel<T>& model) {
  Checkpoint ckpt;
  std::istringstream cfg(model.config().serialize());
  for (std::string line; std::getline(cfg, line);) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) ckpt.metadata[line.substr(0, eq)] = line.substr(eq + 1);
  }
  ckpt.metadata["precision"] = sizeof(T) == 4 ? "float" : "double";
  store_parameters(ckpt, model.parameters());
  return ckpt;
}

ModelConfig model_config_from(const Checkpoint& ckpt) {
  std::string text;
  for (const auto& [k, v] : ckpt.metadata)
    if (k.starts_with("model.")) text += k + "=" + v + "\n";
  return ModelConfig::parse(text);
}

template <typename T>
PoseModel<T> load_model(const Checkpoint& ckpt) {
  PoseModel<T> model(model_config_from(ckpt));
  restore_parameters(model.parameters(), ckpt);
  return model;
}

template void store_parameters(Checkpoint&, const ParameterSet<float>&, std::string_view);
template void store_parameters(Checkpoint&, const ParameterSet<double>&, std::string_view);
template void restore_parameters(ParameterSet<float>&, const Checkpoint&, std::string_view, std::string_view);
template void restore_parameters(ParameterSet<double>&, const Checkpoint&, std::string_view, std::string_view);
template Checkpoint make_model_checkpoint(const PoseModel<float>&);
template Checkpoint make_model_checkpoint(const PoseModel<double>&);
template PoseModel<float> load_model(const Checkpoint&);
template PoseModel<double> load_model(const Checkpoint&);

}  // namespace cgvo
