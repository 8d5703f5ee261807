// latentdiar/clustergan.h
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

// Generator / critic / encoder trio trained on speaker embeddings, and the
// encoder-side inference used at diarization time.
//
// The generator maps a latent code [z_n, z_c] (Gaussian continuous part,
// one-hot speaker part) to embedding space. The critic scores embeddings
// (Wasserstein critic with gradient penalty). The encoder maps embeddings
// back to the latent space: its first d_n outputs estimate z_n directly, the
// remaining d_c are logits of a softmax over training speakers.

#ifndef LATENTDIAR_CLUSTERGAN_H_
#define LATENTDIAR_CLUSTERGAN_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "latentdiar/adam.h"
#include "latentdiar/checkpoint.h"
#include "latentdiar/losses.h"
#include "latentdiar/mlp.h"

namespace latentdiar {

struct ClusterGanConfig {
  int d_n = 30;
  int d_c = 0;  // number of training speakers; filled in from the data
  int embedding_dim = 512;
  int hidden_dim = 512;
  double sigma = 0.1;
  double lambda_gp = 10.0;
  int batch_size = 64;
  int n_critic = 5;
  std::int64_t iterations = 30000;
  LossWeights weights;
  AdamConfig adam;
  std::uint64_t seed = 0;

  // Throws ConfigError on non-positive sizes, negative weights, sigma <= 0.
  void validate() const;
  int latent_dim() const { return d_n + d_c; }
};

nlohmann::json to_json(const ClusterGanConfig& config);
ClusterGanConfig config_from_json(const nlohmann::json& j);

struct LatentCode {
  Eigen::VectorXf continuous;   // z_n
  Eigen::VectorXf categorical;  // z_c, one-hot
  int speaker_index = 0;

  Eigen::VectorXf concat() const;
};

struct LatentBatch {
  Tensor continuous;          // m x d_n
  std::vector<int> speakers;  // m indices into the speaker table
  int num_speakers = 0;

  Tensor concat() const;  // m x (d_n + d_c)
};

// Draws z_n ~ N(0, sigma^2 I) and z_c either as a given speaker or from the
// empirical speaker distribution of the training labels.
class LatentSampler {
 public:
  // Empty `training_labels` means uniform over the d_c speakers.
  LatentSampler(int d_n, int d_c, double sigma,
                std::span<const int> training_labels = {});

  LatentCode sample(std::mt19937_64& rng,
                    std::optional<int> speaker_index = std::nullopt);
  LatentBatch sample_batch(std::mt19937_64& rng, int m);

  int d_n() const { return d_n_; }
  int d_c() const { return d_c_; }

 private:
  int d_n_;
  int d_c_;
  std::normal_distribution<double> normal_;
  std::discrete_distribution<int> prior_;
};

struct ClusterGanModel {
  ClusterGanConfig config;
  Mlp<float> generator;      // d -> hidden -> embedding_dim
  Mlp<float> discriminator;  // embedding_dim -> hidden -> hidden -> 1
  Mlp<float> encoder;        // embedding_dim -> hidden -> d
  std::vector<std::string> speaker_table;
  std::int64_t iteration = 0;

  // Fresh networks for `config` (whose d_c must equal speakers.size()).
  static ClusterGanModel init(const ClusterGanConfig& config,
                              std::vector<std::string> speakers,
                              std::mt19937_64& rng);
  void validate() const;
  int latent_dim() const { return config.latent_dim(); }

  bool operator==(const ClusterGanModel& other) const;
};

CheckpointFile to_checkpoint(const ClusterGanModel& model);
ClusterGanModel from_checkpoint(const CheckpointFile& file);
void save_model(const std::string& path, const ClusterGanModel& model);
ClusterGanModel load_model(const std::string& path);

struct IterationLog {
  std::int64_t iteration = 0;
  double critic_loss = 0;     // last critic step: wasserstein + lambda * GP
  double gradient_penalty = 0;
  double generator_loss = 0;  // -mean D(G(z))
  double cosine_loss = 0;
  double ce_loss = 0;
  double wall_seconds = 0;
};

nlohmann::json to_json(const IterationLog& entry);

struct TrainingLog {
  std::vector<IterationLog> iterations;
  std::int64_t discriminator_updates = 0;
  std::int64_t generator_updates = 0;
  std::int64_t ce_clamped = 0;
};

struct TrainResult {
  ClusterGanModel model;
  TrainingLog log;
};

// Raised when a loss or gradient goes non-finite; carries the model as it was
// at the start of the failing iteration.
class TrainingDivergence : public DivergenceError {
 public:
  TrainingDivergence(const std::string& what, ClusterGanModel last_good)
      : DivergenceError(what), last_good_(std::move(last_good)) {}
  const ClusterGanModel& last_good() const { return last_good_; }

 private:
  ClusterGanModel last_good_;
};

using IterationCallback = std::function<void(const IterationLog&)>;

// Runs `config.iterations` rounds of: n_critic critic updates on
// a * critic loss, then one joint generator + encoder update.
// labels[i] indexes speaker_table and must cover every speaker.
TrainResult train(const ClusterGanConfig& config, const Tensor& embeddings,
                  std::span<const int> labels,
                  std::vector<std::string> speaker_table, std::mt19937_64& rng,
                  const IterationCallback& on_iteration = {});

// Latent embeddings [z_n_hat, softmax(z_c logits)], one row per input row.
// Rows are processed independently so the result does not depend on how the
// input is batched.
Tensor encode(const ClusterGanModel& model, const Tensor& embeddings);

// argmax of the categorical block of each encoded row.
std::vector<int> encode_argmax(const ClusterGanModel& model,
                               const Tensor& embeddings);

}  // namespace latentdiar

#endif  // LATENTDIAR_CLUSTERGAN_H_
