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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cgvo/network.hpp"

// Checkpoint container, version 1. All integers little-endian.
//
//   char[8]  magic "CGVOCKPT"
//   u32      version (1)
//   u32      metadata byte length, then UTF-8 "key=value\n" lines
//   u32      tensor count
//   per tensor:
//     u32    name byte length, then name bytes
//     u8     dtype (1 = float32, 2 = float64)
//     u32    rank, then u64 extent per dimension
//     raw    element values, little-endian IEEE-754, row-major
//
// The metadata carries the serialized ModelConfig (model.* keys) so a
// checkpoint alone reconstructs its network.
namespace cgvo {

enum class DType : std::uint8_t { kFloat32 = 1, kFloat64 = 2 };

struct StoredTensor {
  std::string name;
  nn::Shape shape;
  DType dtype = DType::kFloat32;
  std::vector<double> values;  // exact for both dtypes
};

struct Checkpoint {
  std::map<std::string, std::string> metadata;
  std::vector<StoredTensor> tensors;

  const StoredTensor* find(std::string_view name) const;
  std::string meta(std::string_view key, std::string_view fallback = {}) const;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// Throws IoError if unreadable, CheckpointError if malformed.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Appends every parameter under `prefix` + its name.
template <typename T>
void store_parameters(Checkpoint& ckpt, const ParameterSet<T>& params, std::string_view prefix = {});

// Copies tensors named prefix+name into matching parameters. Only
// parameters whose names start with `only` are considered. Throws
// CheckpointError listing every missing or differently shaped tensor.
template <typename T>
void restore_parameters(ParameterSet<T>& params, const Checkpoint& ckpt, std::string_view prefix = {},
                        std::string_view only = {});

template <typename T>
Checkpoint make_model_checkpoint(const PoseModel<T>& model);

ModelConfig model_config_from(const Checkpoint& ckpt);

template <typename T>
PoseModel<T> load_model(const Checkpoint& ckpt);

}  // namespace cgvo
