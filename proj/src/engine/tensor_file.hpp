// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "engine/tensor.hpp"

namespace segan::engine {

// Checkpoint container:
//   "SGN1", u32 tensor count, then per tensor
//   u16 name length, UTF-8 name, u8 rank, rank x u32 dims,
//   float32 data; all integers and floats little-endian.
struct NamedTensor {
  std::string name;
  Tensor<float> tensor;
};

void write_tensor_file(const std::filesystem::path& path,
                       const std::vector<NamedTensor>& tensors);

// Throws NotFound when the file is missing and CorruptCheckpoint on a bad
// magic, a truncated body or trailing bytes.
std::vector<NamedTensor> read_tensor_file(const std::filesystem::path& path);

}  // namespace segan::engine
