// latentdiar/timeline.h
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

// Speech-activity segments and the fixed-length analysis windows cut from
// them. Each window gets one embedding.

#ifndef LATENTDIAR_TIMELINE_H_
#define LATENTDIAR_TIMELINE_H_

#include <string>
#include <vector>

namespace latentdiar {

inline constexpr double kWindowSeconds = 1.5;
inline constexpr double kHopSeconds = 0.5;
inline constexpr double kMinTailSeconds = 0.5;

struct Segment {
  double start = 0;
  double end = 0;

  double duration() const { return end - start; }
  double midpoint() const { return 0.5 * (start + end); }
  bool operator==(const Segment&) const = default;
};

struct SegmentTimeline {
  std::string session;
  std::vector<Segment> segments;     // speech activity, sorted, disjoint
  std::vector<Segment> subsegments;  // analysis windows, sorted by start
  std::vector<int> parent;           // subsegment -> index into segments
};

// Throws FormatError on negative, inverted, unsorted or overlapping input.
// Touching segments (end == next start) are allowed.
void validate_segments(const std::vector<Segment>& segments,
                       const std::string& what = "speech segments");

// Windows of `window` seconds every `hop` seconds inside each segment. A
// segment no longer than one window becomes a single window. When the
// regular windows stop short of the segment end, a tail window ending at the
// segment end is added if it lasts at least `min_tail`; otherwise the last
// regular window is stretched to the end instead.
SegmentTimeline build_timeline(const std::string& session,
                               const std::vector<Segment>& sad,
                               double window = kWindowSeconds,
                               double hop = kHopSeconds,
                               double min_tail = kMinTailSeconds);

// Attaches externally produced windows to speech segments. Every window
// must lie inside one segment (AlignmentError otherwise).
SegmentTimeline attach_windows(const std::string& session,
                               const std::vector<Segment>& sad,
                               const std::vector<Segment>& windows);

// Sorted union of possibly overlapping intervals.
std::vector<Segment> segment_union(std::vector<Segment> intervals);

}  // namespace latentdiar

#endif  // LATENTDIAR_TIMELINE_H_
