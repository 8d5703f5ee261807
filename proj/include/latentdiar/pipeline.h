// latentdiar/pipeline.h
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

// Session-level diarization: encode window embeddings, optionally fuse them
// with the input embeddings, pick a speaker count, cluster, and turn window
// labels into speaker turns.

#ifndef LATENTDIAR_PIPELINE_H_
#define LATENTDIAR_PIPELINE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "latentdiar/clustergan.h"
#include "latentdiar/clustering.h"
#include "latentdiar/rttm.h"
#include "latentdiar/tensor.h"
#include "latentdiar/timeline.h"

namespace latentdiar {

enum class FusionMode { kConcat };

FusionMode fusion_from_name(const std::string& name);
std::string fusion_name(FusionMode mode);

// Rows scaled to unit L2 norm; DegenerateVectorError on a zero row.
Matrix<double> l2_normalize_rows(const Matrix<double>& x);

// Row-wise [base / |base|, latent / |latent|]. AlignmentError when the row
// counts differ.
Matrix<double> fuse(const Tensor& base, const Tensor& latent,
                    FusionMode mode = FusionMode::kConcat);

struct DiarizeOptions {
  std::optional<int> num_speakers;  // estimated from the embeddings if unset
  bool fuse = false;
  FusionMode fusion = FusionMode::kConcat;
  KMeansOptions kmeans;
  SpeakerCountOptions count;
  std::uint64_t seed = 0;
};

struct DiarizationLabeling {
  std::string session;
  std::vector<int> labels;  // per window, numbered by first appearance
  std::vector<RttmRecord> turns;
  int num_speakers = 0;
  std::optional<SpeakerCountEstimate> estimate;
};

// Clusters precomputed per-window features. The speaker count, when not
// given, is estimated on `count_basis` (same row count as `features`).
DiarizationLabeling cluster_session(const SegmentTimeline& timeline,
                                    const Matrix<double>& features,
                                    const Matrix<double>& count_basis,
                                    const DiarizeOptions& options);

// Full path from window embeddings to speaker turns. Throws AlignmentError
// if `embeddings` does not have one row per window and DataError if an
// explicit speaker count exceeds the number of windows.
DiarizationLabeling diarize(const ClusterGanModel& model,
                            const SegmentTimeline& timeline,
                            const Tensor& embeddings,
                            const DiarizeOptions& options);

// Renumbers labels 0, 1, ... in order of first appearance.
std::vector<int> canonicalize_labels(const std::vector<int>& labels);

// Within each speech segment, every instant goes to the window whose
// midpoint is nearest; runs of equal labels are merged. The result tiles
// the speech segments exactly.
std::vector<RttmRecord> collapse_to_turns(const SegmentTimeline& timeline,
                                          const std::vector<int>& labels);

std::string speaker_name(int label);

}  // namespace latentdiar

#endif  // LATENTDIAR_PIPELINE_H_
