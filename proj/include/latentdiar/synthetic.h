// latentdiar/synthetic.h
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

// Gaussian-cluster stand-in for a real diarization corpus: one session,
// one centroid per speaker, one embedding per analysis window.

#ifndef LATENTDIAR_SYNTHETIC_H_
#define LATENTDIAR_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "latentdiar/embedding_io.h"
#include "latentdiar/rttm.h"
#include "latentdiar/tensor.h"
#include "latentdiar/timeline.h"

namespace latentdiar {

struct SyntheticConfig {
  int num_speakers = 4;
  int segments_per_speaker = 200;  // windows per speaker
  int dim = 512;
  double separation = 8.0;   // minimum distance between speaker centroids
  double noise_sigma = 1.0;  // root-mean-square length of the noise vector
  std::uint64_t seed = 0;
  std::string session = "synth";
  int max_turn_windows = 8;  // a turn spans 1..max windows

  void validate() const;
};

struct SyntheticCorpus {
  SegmentTimeline timeline;           // one speech segment per speaker turn
  EmbeddingSet embeddings;            // aligned with timeline.subsegments
  std::vector<int> labels;            // per window, index into speakers
  std::vector<std::string> speakers;  // "spk0", "spk1", ...
  std::vector<RttmRecord> reference;  // one record per turn
  Matrix<double> centroids;           // num_speakers x dim

  std::vector<std::string> label_names() const;
};

// Centroids point in random directions, scaled so the closest pair is
// exactly `separation` apart. Each window embedding is its speaker's
// centroid plus N(0, noise_sigma^2 / dim I), i.e. noise whose expected
// squared length is noise_sigma^2, so separation / noise_sigma compares two
// distances regardless of dim. Turns last 1.5 + 0.5 (j - 1) seconds
// for j windows and are separated by 0.2-1.0 s of silence; all times are
// whole milliseconds.
SyntheticCorpus generate_synthetic_corpus(const SyntheticConfig& config);

}  // namespace latentdiar

#endif  // LATENTDIAR_SYNTHETIC_H_
