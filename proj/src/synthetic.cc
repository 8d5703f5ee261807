// latentdiar/synthetic.cc
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

#include "latentdiar/synthetic.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include "latentdiar/errors.h"

namespace latentdiar {

namespace {

constexpr int kMinGapMs = 200;
constexpr int kMaxGapMs = 1000;
constexpr int kWindowMs = 1500;
constexpr int kHopMs = 500;

Matrix<double> draw_centroids(const SyntheticConfig& c, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix<double> dirs(c.num_speakers, c.dim);
  for (int i = 0; i < c.num_speakers; ++i) {
    for (int j = 0; j < c.dim; ++j) dirs(i, j) = normal(rng);
    dirs.row(i).normalize();
  }
  double closest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < c.num_speakers; ++i) {
    for (int j = i + 1; j < c.num_speakers; ++j) {
      closest = std::min(closest, (dirs.row(i) - dirs.row(j)).norm());
    }
  }
  if (c.num_speakers == 1) closest = 1.0;
  return dirs * (c.separation / closest);
}

}  // namespace

void SyntheticConfig::validate() const {
  if (num_speakers < 1 || segments_per_speaker < 1 || dim < 1 ||
      max_turn_windows < 1) {
    throw ConfigError("synthetic corpus sizes must be positive");
  }
  if (!(separation > 0)) throw ConfigError("separation must be > 0");
  if (!(noise_sigma >= 0)) throw ConfigError("noise_sigma must be >= 0");
  if (session.empty() || session.find_first_of(" \t\n") != std::string::npos) {
    throw ConfigError("session id must be a non-empty token");
  }
}

std::vector<std::string> SyntheticCorpus::label_names() const {
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (int l : labels) out.push_back(speakers[static_cast<std::size_t>(l)]);
  return out;
}

SyntheticCorpus generate_synthetic_corpus(const SyntheticConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  SyntheticCorpus out;
  out.centroids = draw_centroids(config, rng);
  for (int s = 0; s < config.num_speakers; ++s) {
    out.speakers.push_back("spk" + std::to_string(s));
  }

  // (speaker, windows) per turn.
  std::vector<std::pair<int, int>> turns;
  std::uniform_int_distribution<int> turn_len(1, config.max_turn_windows);
  for (int s = 0; s < config.num_speakers; ++s) {
    for (int left = config.segments_per_speaker; left > 0;) {
      const int j = std::min(turn_len(rng), left);
      turns.emplace_back(s, j);
      left -= j;
    }
  }
  std::shuffle(turns.begin(), turns.end(), rng);

  std::uniform_int_distribution<int> gap(kMinGapMs, kMaxGapMs);
  std::vector<Segment> sad;
  long t_ms = gap(rng);
  for (const auto& [speaker, windows] : turns) {
    const long dur_ms = kWindowMs + kHopMs * (windows - 1);
    sad.push_back({t_ms / 1000.0, (t_ms + dur_ms) / 1000.0});
    RttmRecord r;
    r.session = config.session;
    r.start = t_ms / 1000.0;
    r.duration = dur_ms / 1000.0;
    r.speaker = out.speakers[static_cast<std::size_t>(speaker)];
    out.reference.push_back(std::move(r));
    t_ms += dur_ms + gap(rng);
  }
  out.timeline = build_timeline(config.session, sad);
  for (int p : out.timeline.parent) {
    out.labels.push_back(turns[static_cast<std::size_t>(p)].first);
  }

  const auto n = static_cast<Eigen::Index>(out.labels.size());
  const double per_coordinate =
      config.noise_sigma / std::sqrt(static_cast<double>(config.dim));
  std::normal_distribution<double> noise(
      0.0, per_coordinate > 0 ? per_coordinate : 1.0);
  const bool noiseless = config.noise_sigma == 0;
  out.embeddings.session = config.session;
  out.embeddings.windows = out.timeline.subsegments;
  out.embeddings.values.resize(n, config.dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto c = out.centroids.row(out.labels[static_cast<std::size_t>(i)]);
    for (int j = 0; j < config.dim; ++j) {
      const double e = noiseless ? 0.0 : noise(rng);
      out.embeddings.values(i, j) = static_cast<float>(c(j) + e);
    }
  }
  return out;
}

}  // namespace latentdiar
