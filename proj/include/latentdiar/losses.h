// latentdiar/losses.h
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

// Training objectives of the adversarial clustering model. Every function is
// templated on the scalar type so the same code path can be checked against
// finite differences in double precision.

#ifndef LATENTDIAR_LOSSES_H_
#define LATENTDIAR_LOSSES_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "latentdiar/mlp.h"

namespace latentdiar {

// Rows with a norm below this are rejected by the cosine loss.
inline constexpr double kMinCosineNorm = 1e-12;
// Log-probabilities are floored at log(kProbabilityFloor).
inline constexpr double kProbabilityFloor = 1e-30;

template <typename T>
struct LossGrad {
  T loss = T(0);
  Matrix<T> grad;  // d loss / d prediction
};

// mean_i [1 - cos(predicted_i, target_i)], gradient w.r.t. `predicted`.
// Throws DegenerateVectorError if any row of either input is (near) zero.
template <typename T>
LossGrad<T> cosine_recovery_loss(const Matrix<T>& target,
                                 const Matrix<T>& predicted);

template <typename T>
Matrix<T> softmax_rows(const Matrix<T>& logits);

// Cross-entropy -(1/m) sum_i sum_k onehot[i,k] log probs[i,k] on already
// normalised probabilities. Rows of `probs` must sum to one within 1e-5
// (DataError otherwise). Zero probabilities at the true class are floored
// and counted in *clamped.
template <typename T>
T cluster_ce_loss(const Matrix<T>& one_hot, const Matrix<T>& probs,
                  std::int64_t* clamped = nullptr);

// Same loss computed from logits via log-softmax; the gradient is w.r.t. the
// logits.
template <typename T>
LossGrad<T> cluster_ce_from_logits(std::span<const int> labels,
                                   const Matrix<T>& logits,
                                   std::int64_t* clamped = nullptr);

template <typename T>
struct CriticLoss {
  T loss = T(0);         // wasserstein + lambda * gradient_penalty
  T wasserstein = T(0);  // mean D(fake) - mean D(real)
  T gradient_penalty = T(0);
  MlpGradients<T> grads;  // w.r.t. the critic parameters
};

// Penalty mean_i (||grad_x D(points_i)||_2 - 1)^2 (value only).
template <typename T>
T gradient_penalty(const Mlp<T>& critic, const Matrix<T>& points);

// Critic objective to minimise. Interpolates x_i = mix_i * real_i +
// (1 - mix_i) * fake_i for the penalty.
template <typename T>
CriticLoss<T> wgan_critic_loss(const Mlp<T>& critic, const Matrix<T>& real,
                               const Matrix<T>& fake, T lambda_gp,
                               std::span<const T> mix);

// As above, drawing mix_i ~ U(0, 1) per row.
template <typename T>
CriticLoss<T> wgan_critic_loss(const Mlp<T>& critic, const Matrix<T>& real,
                               const Matrix<T>& fake, T lambda_gp,
                               std::mt19937_64& rng);

struct LossWeights {
  double adversarial = 1.0;  // a
  double cosine = 2.0;       // b
  double cross_entropy = 10.0;  // c
};

template <typename T>
struct GeneratorEncoderLoss {
  T total = T(0);
  T adversarial = T(0);  // -mean D(G(z))
  T cosine = T(0);
  T cross_entropy = T(0);
  std::int64_t ce_clamped = 0;
  MlpGradients<T> generator;
  MlpGradients<T> encoder;
};

// a * (-mean D(G(z))) + b * COS(z_n, E_n(G(z))) + c * CE(z_c, E_c(G(z)))
// where z = [z_n, onehot(speakers)] and the encoder's first z_n.cols()
// outputs are the continuous estimate, the rest are class logits.
template <typename T>
GeneratorEncoderLoss<T> generator_encoder_loss(
    const Mlp<T>& generator, const Mlp<T>& critic, const Mlp<T>& encoder,
    const Matrix<T>& z_n, std::span<const int> speakers, int num_speakers,
    const LossWeights& weights);

template <typename T>
Matrix<T> one_hot_rows(std::span<const int> labels, int num_classes);

}  // namespace latentdiar

#endif  // LATENTDIAR_LOSSES_H_
