// latentdiar/scoring.h
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

// Diarization error rate with a forgiveness collar around reference speaker
// boundaries and an optimal one-to-one speaker mapping.

#ifndef LATENTDIAR_SCORING_H_
#define LATENTDIAR_SCORING_H_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "latentdiar/rttm.h"
#include "latentdiar/tensor.h"

namespace latentdiar {

inline constexpr double kDefaultCollar = 0.25;

struct DerReport {
  double confusion = 0;    // seconds
  double missed = 0;       // seconds
  double false_alarm = 0;  // seconds
  double scored = 0;       // reference speaker-time outside the collars
  double der = 0;          // percent
  std::map<std::string, std::string> speaker_map;  // reference -> hypothesis

  double total_error() const { return confusion + missed + false_alarm; }
};

nlohmann::json to_json(const DerReport& report);

// One-to-one partial mapping (row -> column) maximising the summed entries
// of a non-negative overlap matrix. Pairs with zero overlap are dropped.
std::vector<std::pair<int, int>> optimal_speaker_map(
    const Matrix<double>& overlap);

// Scores one session. Every reference turn start and end gets a no-score
// zone of +-collar. Throws DataError if the records span several sessions or
// if no reference time is left to score.
DerReport score(const std::vector<RttmRecord>& reference,
                const std::vector<RttmRecord>& hypothesis,
                double collar = kDefaultCollar);

// Sums the per-session components (DER recomputed from the totals).
DerReport combine(const std::vector<DerReport>& reports);

}  // namespace latentdiar

#endif  // LATENTDIAR_SCORING_H_
