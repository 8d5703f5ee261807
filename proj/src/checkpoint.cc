// latentdiar/checkpoint.cc
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

#include "latentdiar/checkpoint.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace latentdiar {

namespace {

constexpr char kMagic[8] = {'L', 'D', 'I', 'A', 'R', 'C', 'K', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

void put_u64(std::string* out, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out->append(buf, 8);
}

}  // namespace

const Tensor& CheckpointFile::get(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t.value;
  }
  throw FormatError("checkpoint has no tensor '" + name + "'");
}

std::string serialize_checkpoint(const CheckpointFile& file) {
  nlohmann::json header;
  header["meta"] = file.meta;
  header["tensors"] = nlohmann::json::array();
  for (const auto& t : file.tensors) {
    header["tensors"].push_back(
        {{"name", t.name}, {"rows", t.value.rows()}, {"cols", t.value.cols()}});
  }
  const std::string text = header.dump();
  std::string out(kMagic, sizeof(kMagic));
  put_u64(&out, text.size());
  out += text;
  for (const auto& t : file.tensors) {
    out.append(reinterpret_cast<const char*>(t.value.data()),
               sizeof(float) * static_cast<std::size_t>(t.value.size()));
  }
  return out;
}

CheckpointFile parse_checkpoint(const std::string& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw FormatError("not a latentdiar checkpoint (bad magic)");
  }
  std::uint64_t header_len = 0;
  std::memcpy(&header_len, bytes.data() + 8, 8);
  if (header_len > bytes.size() - 16) {
    throw FormatError("checkpoint header truncated");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(16, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  }
  CheckpointFile file;
  file.meta = header.at("meta");
  std::size_t offset = 16 + header_len;
  for (const auto& entry : header.at("tensors")) {
    const auto rows = entry.at("rows").get<std::int64_t>();
    const auto cols = entry.at("cols").get<std::int64_t>();
    if (rows < 0 || cols < 0) throw FormatError("negative tensor shape");
    const std::size_t nbytes =
        sizeof(float) * static_cast<std::size_t>(rows * cols);
    if (offset + nbytes > bytes.size()) {
      throw FormatError("checkpoint payload truncated at tensor " +
                        entry.at("name").get<std::string>());
    }
    NamedTensor t{entry.at("name").get<std::string>(), Tensor(rows, cols)};
    std::memcpy(t.value.data(), bytes.data() + offset, nbytes);
    offset += nbytes;
    file.tensors.push_back(std::move(t));
  }
  if (offset != bytes.size()) throw FormatError("trailing bytes in checkpoint");
  return file;
}

void write_checkpoint(const std::string& path, const CheckpointFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  const std::string bytes = serialize_checkpoint(file);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path);
}

CheckpointFile read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return parse_checkpoint(bytes);
}

nlohmann::json mlp_topology(const Mlp<float>& model) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : model.layers()) {
    layers.push_back({{"in", l.in_dim()},
                      {"out", l.out_dim()},
                      {"activation", activation_name(l.activation)}});
  }
  return layers;
}

void append_mlp(const std::string& prefix, const Mlp<float>& model,
                CheckpointFile* file) {
  for (std::size_t i = 0; i < model.num_layers(); ++i) {
    const auto& l = model.layers()[i];
    const std::string base = prefix + "." + std::to_string(i);
    file->tensors.push_back({base + ".weight", l.weight});
    file->tensors.push_back({base + ".bias", Tensor(l.bias)});
  }
}

Mlp<float> extract_mlp(const std::string& prefix, const nlohmann::json& topology,
                       const CheckpointFile& file) {
  std::vector<DenseLayer<float>> layers;
  for (std::size_t i = 0; i < topology.size(); ++i) {
    const auto& spec = topology[i];
    const std::string base = prefix + "." + std::to_string(i);
    DenseLayer<float> layer;
    layer.weight = file.get(base + ".weight");
    const Tensor& bias = file.get(base + ".bias");
    layer.activation =
        activation_from_name(spec.at("activation").get<std::string>());
    if (layer.weight.rows() != spec.at("out").get<int>() ||
        layer.weight.cols() != spec.at("in").get<int>() || bias.rows() != 1 ||
        bias.cols() != layer.weight.rows()) {
      throw FormatError("tensor shapes of " + base +
                        " disagree with the recorded topology");
    }
    layer.bias = bias;
    layers.push_back(std::move(layer));
  }
  return Mlp<float>(std::move(layers));
}

}  // namespace latentdiar
