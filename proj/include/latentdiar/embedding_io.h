// latentdiar/embedding_io.h
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

// Text formats for per-session embeddings, their window times, speech
// activity and training labels.
//
//   embeddings:  dim=<d> count=<n> session=<id>
//                <d floats>            (n lines)
//   sidecar:     <start> <end>         (n lines, same stem, ".segments")
//   SAD:         <session> <start> <end>
//   labels:      <speaker id>          (one line per embedding row)
//
// Numbers are written in shortest round-trip form, so emit -> parse is
// bit-exact.

#ifndef LATENTDIAR_EMBEDDING_IO_H_
#define LATENTDIAR_EMBEDDING_IO_H_

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "latentdiar/tensor.h"
#include "latentdiar/timeline.h"

namespace latentdiar {

struct EmbeddingSet {
  std::string session;
  Tensor values;                 // n x dim
  std::vector<Segment> windows;  // n, aligned with rows

  int dim() const { return static_cast<int>(values.cols()); }
  int count() const { return static_cast<int>(values.rows()); }
};

// "<dir>/<stem>.emb" -> "<dir>/<stem>.segments".
std::string sidecar_path(const std::string& embedding_path);

std::string format_embeddings(const std::string& session, const Tensor& values);
// Throws FormatError on a bad header, row count, width or number, and
// DataError on non-finite values.
void parse_embeddings(std::istream& in, const std::string& source,
                      std::string* session, Tensor* values);

void write_embedding_set(const std::string& path, const EmbeddingSet& set);
// Reads the matrix and its sidecar; AlignmentError if their counts differ.
EmbeddingSet read_embedding_set(const std::string& path);

std::vector<Segment> parse_windows(std::istream& in, const std::string& source);
std::string format_windows(const std::vector<Segment>& windows);

// Session -> sorted segments.
using SadMap = std::map<std::string, std::vector<Segment>>;
SadMap parse_sad(std::istream& in, const std::string& source);
SadMap read_sad(const std::string& path);
void write_sad(const std::string& path, const SadMap& sad);

std::vector<std::string> read_labels(const std::string& path);
void write_labels(const std::string& path,
                  const std::vector<std::string>& labels);

// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);
std::string format_number(float v);

}  // namespace latentdiar

#endif  // LATENTDIAR_EMBEDDING_IO_H_
