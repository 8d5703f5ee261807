// latentdiar/pipeline.cc
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

#include "latentdiar/pipeline.h"

#include <algorithm>
#include <map>
#include <random>

#include "latentdiar/errors.h"

namespace latentdiar {

FusionMode fusion_from_name(const std::string& name) {
  if (name == "concat") return FusionMode::kConcat;
  throw ConfigError("unknown fusion mode '" + name + "' (expected concat)");
}

std::string fusion_name(FusionMode mode) {
  switch (mode) {
    case FusionMode::kConcat:
      return "concat";
  }
  return "?";
}

Matrix<double> l2_normalize_rows(const Matrix<double>& x) {
  Matrix<double> out = x;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (!(norm >= 1e-12)) {
      throw DegenerateVectorError("row " + std::to_string(i) +
                                  " has zero norm and cannot be normalized");
    }
    out.row(i) /= norm;
  }
  return out;
}

Matrix<double> fuse(const Tensor& base, const Tensor& latent, FusionMode mode) {
  if (base.rows() != latent.rows()) {
    throw AlignmentError("fuse: " + std::to_string(base.rows()) +
                         " base rows vs " + std::to_string(latent.rows()) +
                         " latent rows");
  }
  switch (mode) {
    case FusionMode::kConcat: {
      Matrix<double> out(base.rows(), base.cols() + latent.cols());
      out.leftCols(base.cols()) = l2_normalize_rows(base.cast<double>());
      out.rightCols(latent.cols()) = l2_normalize_rows(latent.cast<double>());
      return out;
    }
  }
  throw ConfigError("unsupported fusion mode");
}

std::vector<int> canonicalize_labels(const std::vector<int>& labels) {
  std::map<int, int> renumber;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto [it, fresh] =
        renumber.emplace(l, static_cast<int>(renumber.size()));
    out.push_back(it->second);
  }
  return out;
}

std::string speaker_name(int label) { return "spk" + std::to_string(label); }

std::vector<RttmRecord> collapse_to_turns(const SegmentTimeline& timeline,
                                          const std::vector<int>& labels) {
  if (labels.size() != timeline.subsegments.size() ||
      timeline.parent.size() != timeline.subsegments.size()) {
    throw AlignmentError("collapse_to_turns: " + std::to_string(labels.size()) +
                         " labels for " +
                         std::to_string(timeline.subsegments.size()) +
                         " windows");
  }
  std::vector<RttmRecord> turns;
  auto emit = [&](double start, double end, int label) {
    if (!(end > start)) return;
    RttmRecord r;
    r.session = timeline.session;
    r.start = start;
    r.duration = end - start;
    r.speaker = speaker_name(label);
    turns.push_back(std::move(r));
  };
  const std::size_t n = labels.size();
  std::size_t i = 0;
  while (i < n) {
    const int p = timeline.parent[i];
    std::size_t j = i;
    while (j < n && timeline.parent[j] == p) ++j;
    // Windows [i, j) belong to segment p.
    const Segment& seg = timeline.segments[static_cast<std::size_t>(p)];
    double run_start = seg.start;
    for (std::size_t w = i; w < j; ++w) {
      const bool last = w + 1 == j;
      if (!last && labels[w + 1] == labels[w]) continue;
      const double boundary =
          last ? seg.end
               : 0.5 * (timeline.subsegments[w].midpoint() +
                        timeline.subsegments[w + 1].midpoint());
      emit(run_start, boundary, labels[w]);
      run_start = boundary;
    }
    i = j;
  }
  // Speech segments that received no window still need a speaker; they
  // inherit the label of the closest preceding turn (or the first turn).
  if (turns.empty()) return turns;
  std::vector<char> covered(timeline.segments.size(), 0);
  for (int p : timeline.parent) covered[static_cast<std::size_t>(p)] = 1;
  std::vector<RttmRecord> filled;
  std::size_t next = 0;
  for (std::size_t p = 0; p < timeline.segments.size(); ++p) {
    const Segment& seg = timeline.segments[p];
    if (!covered[p]) {
      RttmRecord r = filled.empty() ? turns.front() : filled.back();
      r.start = seg.start;
      r.duration = seg.end - seg.start;
      filled.push_back(std::move(r));
      continue;
    }
    while (next < turns.size() && turns[next].start < seg.end) {
      filled.push_back(turns[next++]);
    }
  }
  return filled;
}

DiarizationLabeling cluster_session(const SegmentTimeline& timeline,
                                    const Matrix<double>& features,
                                    const Matrix<double>& count_basis,
                                    const DiarizeOptions& options) {
  const auto n = static_cast<int>(features.rows());
  if (static_cast<std::size_t>(n) != timeline.subsegments.size() ||
      count_basis.rows() != features.rows()) {
    throw AlignmentError("session " + timeline.session + ": " +
                         std::to_string(n) + " feature rows for " +
                         std::to_string(timeline.subsegments.size()) +
                         " windows");
  }
  if (n == 0) throw DataError("session " + timeline.session + " has no windows");
  DiarizationLabeling out;
  out.session = timeline.session;
  int k = 1;
  if (options.num_speakers) {
    k = *options.num_speakers;
    if (k < 1) throw ConfigError("number of speakers must be >= 1");
    if (k > n) {
      throw DataError("session " + timeline.session + " has " +
                      std::to_string(n) + " windows, fewer than the " +
                      std::to_string(k) + " requested speakers");
    }
  } else if (n >= 2) {
    SpeakerCountOptions count = options.count;
    count.max_speakers = std::min(count.max_speakers, n);
    count.min_speakers = std::min(count.min_speakers, count.max_speakers);
    out.estimate = estimate_num_speakers(count_basis, count);
    k = out.estimate->num_speakers;
  }
  std::mt19937_64 rng(options.seed);
  const ClusterAssignment assignment = kmeans(features, k, options.kmeans, rng);
  out.labels = canonicalize_labels(assignment.labels);
  out.num_speakers = k;
  out.turns = collapse_to_turns(timeline, out.labels);
  return out;
}

DiarizationLabeling diarize(const ClusterGanModel& model,
                            const SegmentTimeline& timeline,
                            const Tensor& embeddings,
                            const DiarizeOptions& options) {
  if (static_cast<std::size_t>(embeddings.rows()) !=
      timeline.subsegments.size()) {
    throw AlignmentError("session " + timeline.session + ": " +
                         std::to_string(embeddings.rows()) +
                         " embeddings for " +
                         std::to_string(timeline.subsegments.size()) +
                         " windows");
  }
  const Tensor latent = encode(model, embeddings);
  const Matrix<double> features = options.fuse
                                      ? fuse(embeddings, latent, options.fusion)
                                      : Matrix<double>(latent.cast<double>());
  return cluster_session(timeline, features, embeddings.cast<double>(), options);
}

}  // namespace latentdiar
