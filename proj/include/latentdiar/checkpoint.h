// latentdiar/checkpoint.h
//
// Copyright 2026  The latentdiar Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Binary model container.
//
// Layout:
//   8 bytes   magic "LDIARCK1"
//   8 bytes   little-endian uint64 header length H
//   H bytes   UTF-8 JSON header: {"meta": {...}, "tensors": [{"name", "rows",
//             "cols"}, ...]}
//   payload   float32 little-endian, row-major, tensors in header order
//
// Floats are stored raw so a save/load cycle is bit-exact.

#ifndef LATENTDIAR_CHECKPOINT_H_
#define LATENTDIAR_CHECKPOINT_H_

#include <string>
#include <vector>

#include <json.hpp>

#include "latentdiar/mlp.h"

namespace latentdiar {

struct NamedTensor {
  std::string name;
  Tensor value;
};

struct CheckpointFile {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<NamedTensor> tensors;

  const Tensor& get(const std::string& name) const;
};

std::string serialize_checkpoint(const CheckpointFile& file);
CheckpointFile parse_checkpoint(const std::string& bytes);

void write_checkpoint(const std::string& path, const CheckpointFile& file);
CheckpointFile read_checkpoint(const std::string& path);

// Topology description of an MLP: [{"in", "out", "activation"}, ...].
nlohmann::json mlp_topology(const Mlp<float>& model);
// Appends "<prefix>.<i>.weight" and "<prefix>.<i>.bias" tensors.
void append_mlp(const std::string& prefix, const Mlp<float>& model,
                CheckpointFile* file);
Mlp<float> extract_mlp(const std::string& prefix, const nlohmann::json& topology,
                       const CheckpointFile& file);

}  // namespace latentdiar

#endif  // LATENTDIAR_CHECKPOINT_H_
