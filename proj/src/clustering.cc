// latentdiar/clustering.cc
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

#include "latentdiar/clustering.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace latentdiar {

namespace {

using Index = Eigen::Index;

double squared_distance(const Matrix<double>& a, Index i,
                        const Matrix<double>& b, Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

Matrix<double> seed_plus_plus(const Matrix<double>& x, int k,
                              std::mt19937_64& rng) {
  const Index n = x.rows();
  Matrix<double> centroids(k, x.cols());
  std::uniform_int_distribution<Index> first(0, n - 1);
  centroids.row(0) = x.row(first(rng));
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) d2[i] = squared_distance(x, i, centroids, 0);
  for (int c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    Index chosen = 0;
    if (total > 0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      chosen = n - 1;
      for (Index i = 0; i < n; ++i) {
        target -= d2[i];
        if (target < 0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = first(rng);
    }
    centroids.row(c) = x.row(chosen);
    for (Index i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(x, i, centroids, c));
    }
  }
  return centroids;
}

// Single-point moves (Hartigan): move x_i from a to b whenever
//   n_b / (n_b + 1) |x_i - c_b|^2 < n_a / (n_a - 1) |x_i - c_a|^2,
// which strictly lowers the objective. Lloyd fixed points can still admit
// such moves; the converse is not true, so this only tightens the result.
void hartigan_refine(const Matrix<double>& x, int max_passes,
                     std::vector<int>* labels, std::vector<int>* counts,
                     Matrix<double>* centroids,
                     std::vector<double>* inertia_history) {
  const Index n = x.rows();
  const int k = static_cast<int>(centroids->rows());
  auto& lab = *labels;
  auto& cnt = *counts;
  auto& cen = *centroids;
  auto recompute = [&] {
    cen.setZero();
    for (Index i = 0; i < n; ++i) cen.row(lab[i]) += x.row(i);
    for (int c = 0; c < k; ++c) cen.row(c) /= cnt[c];
  };
  recompute();
  for (int pass = 0; pass < max_passes; ++pass) {
    bool moved = false;
    for (Index i = 0; i < n; ++i) {
      const int a = lab[i];
      if (cnt[a] < 2) continue;
      const double na = cnt[a];
      const double remove = na / (na - 1) * squared_distance(x, i, cen, a);
      int target = a;
      double add = remove;
      for (int b = 0; b < k; ++b) {
        if (b == a) continue;
        const double nb = cnt[b];
        const double cost = nb / (nb + 1) * squared_distance(x, i, cen, b);
        if (cost < add) {
          add = cost;
          target = b;
        }
      }
      if (target == a || !(add < remove * (1 - 1e-12))) continue;
      cen.row(a) = (cen.row(a) * na - x.row(i)) / (na - 1);
      cen.row(target) = (cen.row(target) * cnt[target] + x.row(i)) /
                        (cnt[target] + 1.0);
      --cnt[a];
      ++cnt[target];
      lab[i] = target;
      moved = true;
    }
    if (!moved) break;
    recompute();
    double inertia = 0;
    for (Index i = 0; i < n; ++i) inertia += squared_distance(x, i, cen, lab[i]);
    inertia_history->push_back(inertia);
  }
}

ClusterAssignment lloyd(const Matrix<double>& x, Matrix<double> centroids,
                        const KMeansOptions& options) {
  const Index n = x.rows();
  const int k = static_cast<int>(centroids.rows());
  ClusterAssignment out;
  out.labels.assign(static_cast<std::size_t>(n), 0);
  std::vector<double> d2(static_cast<std::size_t>(n));
  std::vector<int> counts(static_cast<std::size_t>(k));

  for (int iter = 1;; ++iter) {
    for (Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int c = 0; c < k; ++c) {
        const double d = squared_distance(x, i, centroids, c);
        if (d < best) {
          best = d;
          arg = c;
        }
      }
      out.labels[i] = arg;
      d2[i] = best;
    }
    std::fill(counts.begin(), counts.end(), 0);
    for (int y : out.labels) ++counts[y];
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      // Re-seed an empty cluster at the point farthest from its centroid,
      // taken from a cluster that can spare it.
      Index far = -1;
      for (Index i = 0; i < n; ++i) {
        if (counts[out.labels[i]] < 2) continue;
        if (far < 0 || d2[i] > d2[far]) far = i;
      }
      if (far < 0) break;
      --counts[out.labels[far]];
      ++counts[c];
      out.labels[far] = c;
      d2[far] = 0;
      centroids.row(c) = x.row(far);
    }
    out.inertia_history.push_back(std::accumulate(d2.begin(), d2.end(), 0.0));

    Matrix<double> next = Matrix<double>::Zero(k, x.cols());
    for (Index i = 0; i < n; ++i) next.row(out.labels[i]) += x.row(i);
    double shift = 0;
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) next.row(c) /= counts[c];
      else next.row(c) = centroids.row(c);
      shift = std::max(shift, (next.row(c) - centroids.row(c)).norm());
    }
    centroids = std::move(next);
    out.iterations = iter;
    if (shift < options.tol || iter >= options.max_iter) break;
  }
  hartigan_refine(x, options.max_iter, &out.labels, &counts, &centroids,
                  &out.inertia_history);
  out.inertia = 0;
  for (Index i = 0; i < n; ++i) {
    out.inertia += squared_distance(x, i, centroids, out.labels[i]);
  }
  out.centroids = std::move(centroids);
  return out;
}

}  // namespace

ClusterAssignment kmeans(const Matrix<double>& points, int k,
                         const KMeansOptions& options, std::mt19937_64& rng) {
  if (k < 1) throw ConfigError("k-means needs k >= 1");
  if (k > points.rows()) {
    throw ConfigError("k-means: k = " + std::to_string(k) + " exceeds " +
                      std::to_string(points.rows()) + " points");
  }
  if (options.restarts < 1 || options.max_iter < 1) {
    throw ConfigError("k-means needs restarts >= 1 and max_iter >= 1");
  }
  if (!points.allFinite()) throw DataError("k-means input has NaN/Inf");
  ClusterAssignment best;
  for (int r = 0; r < options.restarts; ++r) {
    auto run = lloyd(points, seed_plus_plus(points, k, rng), options);
    run.restart = r;
    if (r == 0 || run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

AffinityMatrix binarized_cosine_affinity(const Matrix<double>& embeddings,
                                         double p_binarize) {
  if (!(p_binarize > 0 && p_binarize <= 1)) {
    throw ConfigError("binarization fraction must lie in (0, 1]");
  }
  const Index n = embeddings.rows();
  Matrix<double> unit = embeddings;
  for (Index i = 0; i < n; ++i) {
    const double norm = unit.row(i).norm();
    if (!(norm >= 1e-12)) {
      throw DegenerateVectorError("embedding row " + std::to_string(i) +
                                  " has zero norm; cosine is undefined");
    }
    unit.row(i) /= norm;
  }
  const Matrix<double> cosine = unit * unit.transpose();
  const auto keep = static_cast<Index>(
      std::min<double>(static_cast<double>(n),
                       std::ceil(p_binarize * static_cast<double>(n) - 1e-9)));

  AffinityMatrix out;
  out.p_binarize = p_binarize;
  out.values = Matrix<double>::Zero(n, n);
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), Index{0});
    std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                      [&](Index a, Index b) {
                        if (a == i || b == i) return a == i && b != i;
                        if (cosine(i, a) != cosine(i, b))
                          return cosine(i, a) > cosine(i, b);
                        return a < b;
                      });
    for (Index j = 0; j < keep; ++j) out.values(i, order[j]) = 1.0;
  }
  out.values = out.values.cwiseMax(out.values.transpose());
  out.values.diagonal().setOnes();
  return out;
}

Eigen::VectorXd normalized_laplacian_spectrum(const AffinityMatrix& affinity) {
  const auto& a = affinity.values;
  const Index n = a.rows();
  const Eigen::VectorXd degree = a.rowwise().sum();
  Eigen::VectorXd inv_sqrt(n);
  for (Index i = 0; i < n; ++i) {
    inv_sqrt(i) = degree(i) > 0 ? 1.0 / std::sqrt(degree(i)) : 0.0;
  }
  Eigen::MatrixXd laplacian = -(inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal());
  laplacian.diagonal().array() += 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian,
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw DivergenceError("Laplacian eigendecomposition did not converge");
  }
  return solver.eigenvalues();
}

int count_components(const AffinityMatrix& affinity) {
  const Index n = affinity.values.rows();
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  std::vector<Index> stack;
  int components = 0;
  for (Index s = 0; s < n; ++s) {
    if (seen[s]) continue;
    ++components;
    seen[s] = 1;
    stack.push_back(s);
    while (!stack.empty()) {
      const Index u = stack.back();
      stack.pop_back();
      for (Index v = 0; v < n; ++v) {
        if (!seen[v] && affinity.values(u, v) > 0) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
  }
  return components;
}

SpeakerCountEstimate estimate_num_speakers(const AffinityMatrix& affinity,
                                           const SpeakerCountOptions& options) {
  const int n = static_cast<int>(affinity.values.rows());
  if (n < 2) throw ConfigError("speaker counting needs at least 2 embeddings");
  if (options.min_speakers < 1 || options.max_speakers < options.min_speakers ||
      options.max_speakers > n) {
    throw ConfigError("speaker count range [" +
                      std::to_string(options.min_speakers) + ", " +
                      std::to_string(options.max_speakers) +
                      "] is invalid for " + std::to_string(n) + " embeddings");
  }
  SpeakerCountEstimate est;
  est.eigenvalues = normalized_laplacian_spectrum(affinity);
  est.components = count_components(affinity);
  if (est.components > options.max_speakers) {
    est.capped = true;
    est.num_speakers = options.max_speakers;
    return est;
  }
  // The gap for k needs lambda_{k+1}, so k is at most n - 1.
  const int hi = std::min(options.max_speakers, n - 1);
  est.num_speakers = options.min_speakers;
  double best = -std::numeric_limits<double>::infinity();
  for (int k = options.min_speakers; k <= hi; ++k) {
    const double gap = est.eigenvalues(k) - est.eigenvalues(k - 1);
    est.gaps.push_back(gap);
    if (gap > best) {
      best = gap;
      est.num_speakers = k;
    }
  }
  return est;
}

SpeakerCountEstimate estimate_num_speakers(const Matrix<double>& embeddings,
                                           const SpeakerCountOptions& options) {
  return estimate_num_speakers(
      binarized_cosine_affinity(embeddings, options.p_binarize), options);
}

double cluster_purity(const std::vector<int>& predicted,
                      const std::vector<int>& reference) {
  if (predicted.size() != reference.size() || predicted.empty()) {
    throw AlignmentError("purity needs equally sized, non-empty labelings");
  }
  std::map<int, std::map<int, int>> table;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    ++table[predicted[i]][reference[i]];
  }
  int correct = 0;
  for (const auto& [cluster, counts] : table) {
    int best = 0;
    for (const auto& [label, c] : counts) best = std::max(best, c);
    correct += best;
  }
  return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

}  // namespace latentdiar
