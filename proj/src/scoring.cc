// latentdiar/scoring.cc
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

#include "latentdiar/scoring.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "latentdiar/errors.h"

namespace latentdiar {

namespace {

struct Interval {
  double start;
  double end;
};

// Hungarian algorithm (shortest augmenting paths with potentials) on an
// n x n cost matrix; returns the column assigned to each row.
std::vector<int> min_cost_assignment(const Matrix<double>& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

// Sorted union of a speaker's turns.
std::vector<Interval> merge(std::vector<Interval> v) {
  std::sort(v.begin(), v.end(),
            [](const Interval& a, const Interval& b) { return a.start < b.start; });
  std::vector<Interval> out;
  for (const auto& iv : v) {
    if (!out.empty() && iv.start <= out.back().end) {
      out.back().end = std::max(out.back().end, iv.end);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

struct SpeakerTracks {
  std::vector<std::string> names;
  std::vector<std::vector<Interval>> turns;
};

SpeakerTracks group_by_speaker(const std::vector<RttmRecord>& records) {
  SpeakerTracks t;
  std::map<std::string, int> index;
  for (const auto& r : records) {
    auto [it, fresh] = index.emplace(r.speaker, static_cast<int>(t.names.size()));
    if (fresh) {
      t.names.push_back(r.speaker);
      t.turns.emplace_back();
    }
    t.turns[it->second].push_back({r.start, r.end()});
  }
  for (auto& v : t.turns) v = merge(std::move(v));
  return t;
}

// Active flag per speaker over elementary intervals [t0, t1] delimited by
// the sorted breakpoints.
class Sweep {
 public:
  explicit Sweep(const std::vector<std::vector<Interval>>* tracks)
      : tracks_(tracks), cursor_(tracks->size(), 0) {}

  std::vector<int> active(double t0, double t1) {
    std::vector<int> out;
    for (std::size_t s = 0; s < tracks_->size(); ++s) {
      const auto& v = (*tracks_)[s];
      auto& c = cursor_[s];
      while (c < v.size() && v[c].end <= t0) ++c;
      if (c < v.size() && v[c].start <= t0 && t1 <= v[c].end) {
        out.push_back(static_cast<int>(s));
      }
    }
    return out;
  }

 private:
  const std::vector<std::vector<Interval>>* tracks_;
  std::vector<std::size_t> cursor_;
};

struct Piece {
  double duration;
  std::vector<int> ref;
  std::vector<int> hyp;
};

void require_single_session(const std::vector<RttmRecord>& ref,
                            const std::vector<RttmRecord>& hyp) {
  const std::string* session = nullptr;
  for (const auto* list : {&ref, &hyp}) {
    for (const auto& r : *list) {
      if (session == nullptr) session = &r.session;
      if (r.session != *session) {
        throw DataError("score() expects a single session, saw '" + *session +
                        "' and '" + r.session + "'");
      }
    }
  }
}

}  // namespace

nlohmann::json to_json(const DerReport& r) {
  return {{"der", r.der},
          {"confusion", r.confusion},
          {"missed", r.missed},
          {"false_alarm", r.false_alarm},
          {"scored", r.scored},
          {"speaker_map", r.speaker_map}};
}

std::vector<std::pair<int, int>> optimal_speaker_map(
    const Matrix<double>& overlap) {
  const int r = static_cast<int>(overlap.rows());
  const int h = static_cast<int>(overlap.cols());
  const int n = std::max(r, h);
  if (n == 0) return {};
  if ((overlap.array() < 0).any()) {
    throw ConfigError("overlap matrix entries must be non-negative");
  }
  Matrix<double> cost = Matrix<double>::Zero(n, n);
  cost.topLeftCorner(r, h) = -overlap;
  const auto assignment = min_cost_assignment(cost);
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < r; ++i) {
    const int j = assignment[i];
    if (j >= 0 && j < h && overlap(i, j) > 0) out.emplace_back(i, j);
  }
  return out;
}

DerReport score(const std::vector<RttmRecord>& reference,
                const std::vector<RttmRecord>& hypothesis, double collar) {
  if (!(collar >= 0) || !std::isfinite(collar)) {
    throw ConfigError("collar must be a finite, non-negative number");
  }
  if (reference.empty()) {
    throw DataError("empty reference: DER is undefined");
  }
  require_single_session(reference, hypothesis);

  const SpeakerTracks ref = group_by_speaker(reference);
  const SpeakerTracks hyp = group_by_speaker(hypothesis);

  std::vector<Interval> zones;
  if (collar > 0) {
    for (const auto& turns : ref.turns) {
      for (const auto& t : turns) {
        zones.push_back({t.start - collar, t.start + collar});
        zones.push_back({t.end - collar, t.end + collar});
      }
    }
  }
  const std::vector<std::vector<Interval>> no_score = {merge(zones)};

  std::vector<double> points;
  for (const auto* tracks : {&ref.turns, &hyp.turns, &no_score}) {
    for (const auto& v : *tracks) {
      for (const auto& iv : v) {
        points.push_back(iv.start);
        points.push_back(iv.end);
      }
    }
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  Sweep ref_sweep(&ref.turns), hyp_sweep(&hyp.turns), zone_sweep(&no_score);
  std::vector<Piece> pieces;
  Matrix<double> overlap =
      Matrix<double>::Zero(static_cast<Eigen::Index>(ref.names.size()),
                           static_cast<Eigen::Index>(hyp.names.size()));
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double t0 = points[i], t1 = points[i + 1];
    auto r = ref_sweep.active(t0, t1);
    auto h = hyp_sweep.active(t0, t1);
    const bool excluded = !zone_sweep.active(t0, t1).empty();
    if (excluded || (r.empty() && h.empty())) continue;
    const double d = t1 - t0;
    for (int a : r)
      for (int b : h) overlap(a, b) += d;
    pieces.push_back({d, std::move(r), std::move(h)});
  }

  DerReport report;
  std::vector<int> mapped(ref.names.size(), -1);
  for (const auto& [a, b] : optimal_speaker_map(overlap)) {
    mapped[static_cast<std::size_t>(a)] = b;
    report.speaker_map[ref.names[static_cast<std::size_t>(a)]] =
        hyp.names[static_cast<std::size_t>(b)];
  }

  for (const auto& p : pieces) {
    const auto nref = static_cast<double>(p.ref.size());
    const auto nhyp = static_cast<double>(p.hyp.size());
    double correct = 0;
    for (int a : p.ref) {
      const int b = mapped[static_cast<std::size_t>(a)];
      if (b >= 0 && std::find(p.hyp.begin(), p.hyp.end(), b) != p.hyp.end()) {
        correct += 1;
      }
    }
    report.scored += p.duration * nref;
    report.missed += p.duration * std::max(0.0, nref - nhyp);
    report.false_alarm += p.duration * std::max(0.0, nhyp - nref);
    report.confusion += p.duration * (std::min(nref, nhyp) - correct);
  }
  if (!(report.scored > 0)) {
    throw DataError("no scorable reference time left after applying the collar");
  }
  report.der = 100.0 * report.total_error() / report.scored;
  return report;
}

DerReport combine(const std::vector<DerReport>& reports) {
  DerReport out;
  for (const auto& r : reports) {
    out.confusion += r.confusion;
    out.missed += r.missed;
    out.false_alarm += r.false_alarm;
    out.scored += r.scored;
  }
  if (!(out.scored > 0)) throw DataError("no scored time across sessions");
  out.der = 100.0 * out.total_error() / out.scored;
  return out;
}

}  // namespace latentdiar
