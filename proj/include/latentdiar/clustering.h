// latentdiar/clustering.h
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

#ifndef LATENTDIAR_CLUSTERING_H_
#define LATENTDIAR_CLUSTERING_H_

#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "latentdiar/tensor.h"

namespace latentdiar {

struct KMeansOptions {
  int restarts = 10;
  int max_iter = 300;
  double tol = 1e-6;  // stop once no centroid moves farther than this
};

struct ClusterAssignment {
  std::vector<int> labels;
  Matrix<double> centroids;  // k x dim
  double inertia = 0;        // sum of squared distances to own centroid
  int restart = 0;           // index of the winning restart
  int iterations = 0;
  // Inertia after every assignment step of the winning restart.
  std::vector<double> inertia_history;
};

// Best of `restarts` runs of Lloyd's algorithm with k-means++ seeding,
// chosen by (inertia, restart index). A cluster that empties during Lloyd's
// is re-seeded at the point farthest from its centroid. Each run ends with
// Hartigan single-point moves, which escape Lloyd fixed points that a
// one-point transfer can still improve.
// Throws ConfigError unless 1 <= k <= points.rows().
ClusterAssignment kmeans(const Matrix<double>& points, int k,
                         const KMeansOptions& options, std::mt19937_64& rng);

struct AffinityMatrix {
  Matrix<double> values;  // n x n, entries in {0, 1}, symmetric, unit diagonal
  double p_binarize = 0.2;
  std::string symmetrization = "max";
};

// Cosine similarity, binarised per row (top ceil(p * n) entries become 1),
// then symmetrised by elementwise max with the transpose.
AffinityMatrix binarized_cosine_affinity(const Matrix<double>& embeddings,
                                         double p_binarize);

// Ascending eigenvalues of I - D^-1/2 A D^-1/2.
Eigen::VectorXd normalized_laplacian_spectrum(const AffinityMatrix& affinity);

int count_components(const AffinityMatrix& affinity);

struct SpeakerCountOptions {
  int max_speakers = 10;
  int min_speakers = 2;
  double p_binarize = 0.2;
};

struct SpeakerCountEstimate {
  int num_speakers = 0;
  Eigen::VectorXd eigenvalues;  // ascending
  std::vector<double> gaps;     // gaps[i] is the gap for k = min_speakers + i
  int components = 0;
  // The affinity graph has more components than max_speakers allows.
  bool capped = false;
};

// Eigen-gap estimate: argmax_k lambda_{k+1} - lambda_k over
// k in [min_speakers, max_speakers] (1-based eigenvalue index, ascending),
// ties going to the smaller k.
SpeakerCountEstimate estimate_num_speakers(const Matrix<double>& embeddings,
                                           const SpeakerCountOptions& options);
SpeakerCountEstimate estimate_num_speakers(const AffinityMatrix& affinity,
                                           const SpeakerCountOptions& options);

// Fraction of points whose cluster's majority reference label matches their
// own reference label.
double cluster_purity(const std::vector<int>& predicted,
                      const std::vector<int>& reference);

}  // namespace latentdiar

#endif  // LATENTDIAR_CLUSTERING_H_
