// latentdiar/timeline.cc
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

#include "latentdiar/timeline.h"

#include <algorithm>
#include <cmath>

#include "latentdiar/errors.h"

namespace latentdiar {

namespace {

constexpr double kTimeEpsilon = 1e-9;

std::string describe(const Segment& s) {
  return "[" + std::to_string(s.start) + ", " + std::to_string(s.end) + "]";
}

}  // namespace

void validate_segments(const std::vector<Segment>& segments,
                       const std::string& what) {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Segment& s = segments[i];
    if (!std::isfinite(s.start) || !std::isfinite(s.end)) {
      throw FormatError(what + ": non-finite time in segment " +
                        std::to_string(i));
    }
    if (s.start < 0) {
      throw FormatError(what + ": negative start in " + describe(s));
    }
    if (!(s.end > s.start)) {
      throw FormatError(what + ": inverted or empty segment " + describe(s));
    }
    if (i > 0 && s.start < segments[i - 1].end) {
      throw FormatError(what + ": " + describe(s) + " overlaps or precedes " +
                        describe(segments[i - 1]));
    }
  }
}

SegmentTimeline build_timeline(const std::string& session,
                               const std::vector<Segment>& sad, double window,
                               double hop, double min_tail) {
  if (!(window > 0) || !(hop > 0) || hop > window || min_tail < 0) {
    throw ConfigError("need 0 < hop <= window and min_tail >= 0");
  }
  validate_segments(sad);
  SegmentTimeline t;
  t.session = session;
  t.segments = sad;
  for (std::size_t p = 0; p < sad.size(); ++p) {
    const double s = sad[p].start, e = sad[p].end;
    if (e - s <= window + kTimeEpsilon) {
      t.subsegments.push_back({s, e});
    } else {
      int i = 0;
      for (; s + i * hop + window <= e + kTimeEpsilon; ++i) {
        t.subsegments.push_back({s + i * hop, s + i * hop + window});
      }
      if (t.subsegments.back().end < e - kTimeEpsilon) {
        const double tail_start = s + i * hop;
        if (e - tail_start >= min_tail - kTimeEpsilon) {
          t.subsegments.push_back({tail_start, e});
        } else {
          t.subsegments.back().end = e;
        }
      } else {
        t.subsegments.back().end = e;
      }
    }
    t.parent.resize(t.subsegments.size(), static_cast<int>(p));
  }
  return t;
}

SegmentTimeline attach_windows(const std::string& session,
                               const std::vector<Segment>& sad,
                               const std::vector<Segment>& windows) {
  validate_segments(sad);
  SegmentTimeline t;
  t.session = session;
  t.segments = sad;
  t.subsegments = windows;
  t.parent.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const Segment& w = windows[i];
    if (!(w.end > w.start)) {
      throw FormatError("window " + std::to_string(i) + " " + describe(w) +
                        " is inverted or empty");
    }
    if (i > 0 && w.start < windows[i - 1].start) {
      throw FormatError("windows must be sorted by start time");
    }
    // Last segment starting at or before the window start.
    auto it = std::upper_bound(
        sad.begin(), sad.end(), w.start + kTimeEpsilon,
        [](double v, const Segment& s) { return v < s.start; });
    if (it == sad.begin() || w.end > std::prev(it)->end + kTimeEpsilon) {
      throw AlignmentError("window " + describe(w) +
                           " is not inside any speech segment");
    }
    t.parent.push_back(static_cast<int>(std::prev(it) - sad.begin()));
  }
  return t;
}

std::vector<Segment> segment_union(std::vector<Segment> intervals) {
  std::sort(intervals.begin(), intervals.end(),
            [](const Segment& a, const Segment& b) { return a.start < b.start; });
  std::vector<Segment> out;
  for (const Segment& s : intervals) {
    if (!out.empty() && s.start <= out.back().end) {
      out.back().end = std::max(out.back().end, s.end);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace latentdiar
