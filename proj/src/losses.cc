// latentdiar/losses.cc
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

#include "latentdiar/losses.h"

#include <cmath>
#include <limits>
#include <string>

namespace latentdiar {

template <typename T>
Matrix<T> one_hot_rows(std::span<const int> labels, int num_classes) {
  Matrix<T> out = Matrix<T>::Zero(static_cast<Eigen::Index>(labels.size()),
                                  num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw DimensionError("label " + std::to_string(labels[i]) +
                           " outside [0, " + std::to_string(num_classes) + ")");
    }
    out(static_cast<Eigen::Index>(i), labels[i]) = T(1);
  }
  return out;
}

template <typename T>
LossGrad<T> cosine_recovery_loss(const Matrix<T>& target,
                                 const Matrix<T>& predicted) {
  require_same_shape(target, predicted, "cosine_recovery_loss");
  const auto m = target.rows();
  if (m == 0) throw DimensionError("cosine_recovery_loss on an empty batch");
  LossGrad<T> out;
  out.grad.resize(m, target.cols());
  const T inv_m = T(1) / static_cast<T>(m);
  T total = T(0);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto u = predicted.row(i);
    const auto v = target.row(i);
    const T nu = u.norm();
    const T nv = v.norm();
    if (!(nu >= T(kMinCosineNorm)) || !(nv >= T(kMinCosineNorm))) {
      throw DegenerateVectorError("cosine loss: row " + std::to_string(i) +
                                  " has (near) zero norm");
    }
    const T cos = u.dot(v) / (nu * nv);
    total += T(1) - cos;
    out.grad.row(i) = -inv_m * (v / (nu * nv) - (cos / (nu * nu)) * u);
  }
  out.loss = total * inv_m;
  return out;
}

template <typename T>
Matrix<T> softmax_rows(const Matrix<T>& logits) {
  Matrix<T> out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const T mx = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - mx).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

template <typename T>
T cluster_ce_loss(const Matrix<T>& one_hot, const Matrix<T>& probs,
                  std::int64_t* clamped) {
  require_same_shape(one_hot, probs, "cluster_ce_loss");
  const auto m = probs.rows();
  if (m == 0) throw DimensionError("cluster_ce_loss on an empty batch");
  const T log_floor = static_cast<T>(std::log(kProbabilityFloor));
  T total = T(0);
  for (Eigen::Index i = 0; i < m; ++i) {
    const T s = probs.row(i).sum();
    if (!(std::abs(s - T(1)) <= T(1e-5))) {
      throw DataError("cluster_ce_loss: probability row " + std::to_string(i) +
                      " sums to " + std::to_string(static_cast<double>(s)));
    }
    for (Eigen::Index k = 0; k < probs.cols(); ++k) {
      if (one_hot(i, k) == T(0)) continue;
      T lp = probs(i, k) > T(0) ? std::log(probs(i, k))
                                : -std::numeric_limits<T>::infinity();
      if (lp < log_floor) {
        lp = log_floor;
        if (clamped) ++*clamped;
      }
      total -= one_hot(i, k) * lp;
    }
  }
  return total / static_cast<T>(m);
}

template <typename T>
LossGrad<T> cluster_ce_from_logits(std::span<const int> labels,
                                   const Matrix<T>& logits,
                                   std::int64_t* clamped) {
  const auto m = logits.rows();
  if (static_cast<std::size_t>(m) != labels.size()) {
    throw DimensionError("cluster_ce_from_logits: label count mismatch");
  }
  if (m == 0) throw DimensionError("cluster_ce_from_logits on an empty batch");
  const T log_floor = static_cast<T>(std::log(kProbabilityFloor));
  const T inv_m = T(1) / static_cast<T>(m);
  LossGrad<T> out;
  out.grad.resize(m, logits.cols());
  T total = T(0);
  for (Eigen::Index i = 0; i < m; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= logits.cols()) {
      throw DimensionError("label " + std::to_string(y) + " out of range");
    }
    const T mx = logits.row(i).maxCoeff();
    const auto shifted = (logits.row(i).array() - mx).eval();
    const auto e = shifted.exp().eval();
    const T sum = e.sum();
    T lp = shifted(y) - std::log(sum);
    if (lp < log_floor) {
      lp = log_floor;
      if (clamped) ++*clamped;
    }
    total -= lp;
    out.grad.row(i) = (e / sum).matrix() * inv_m;
    out.grad(i, y) -= inv_m;
  }
  out.loss = total * inv_m;
  return out;
}

namespace {

// (||g|| - 1)^2 per row, with its derivative w.r.t. g scaled by `scale`.
template <typename T>
T penalty_and_upstream(const Matrix<T>& g, T scale, Matrix<T>* upstream) {
  const auto m = g.rows();
  upstream->resize(m, g.cols());
  T total = T(0);
  for (Eigen::Index i = 0; i < m; ++i) {
    const T n = g.row(i).norm();
    total += (n - T(1)) * (n - T(1));
    if (n > T(0)) {
      upstream->row(i) = (scale * T(2) * (n - T(1)) / n) * g.row(i);
    } else {
      upstream->row(i).setZero();
    }
  }
  return total;
}

}  // namespace

template <typename T>
T gradient_penalty(const Mlp<T>& critic, const Matrix<T>& points) {
  if (points.rows() == 0) throw DimensionError("gradient penalty on no points");
  const auto cache = forward(critic, points);
  const auto g = input_gradient(critic, cache);
  Matrix<T> unused;
  return penalty_and_upstream<T>(g.value, T(0), &unused) /
         static_cast<T>(points.rows());
}

template <typename T>
CriticLoss<T> wgan_critic_loss(const Mlp<T>& critic, const Matrix<T>& real,
                               const Matrix<T>& fake, T lambda_gp,
                               std::span<const T> mix) {
  require_same_shape(real, fake, "wgan_critic_loss batches");
  const auto m = real.rows();
  if (m == 0) throw DimensionError("wgan_critic_loss on an empty batch");
  if (static_cast<std::size_t>(m) != mix.size()) {
    throw DimensionError("wgan_critic_loss: one mixing weight per row needed");
  }
  const T inv_m = T(1) / static_cast<T>(m);

  // Separate passes keep D(real) and D(fake) bit-identical for equal rows.
  const auto rcache = forward(critic, real);
  const auto fcache = forward(critic, fake);
  const T mean_real = rcache.output.mean();
  const T mean_fake = fcache.output.mean();

  CriticLoss<T> result;
  result.grads =
      backward(critic, rcache, Matrix<T>(Matrix<T>::Constant(m, 1, -inv_m)))
          .params;
  result.grads.add(
      backward(critic, fcache, Matrix<T>(Matrix<T>::Constant(m, 1, inv_m)))
          .params);
  result.wasserstein = mean_fake - mean_real;

  Matrix<T> interp(m, real.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    const T e = mix[static_cast<std::size_t>(i)];
    interp.row(i) = e * real.row(i) + (T(1) - e) * fake.row(i);
  }
  const auto icache = forward(critic, interp);
  const auto ig = input_gradient(critic, icache);
  Matrix<T> upstream;
  result.gradient_penalty =
      penalty_and_upstream<T>(ig.value, lambda_gp * inv_m, &upstream) * inv_m;
  result.grads.add(input_gradient_backward(critic, icache, ig, upstream));
  result.loss = result.wasserstein + lambda_gp * result.gradient_penalty;

  if (!std::isfinite(static_cast<double>(result.loss)) ||
      !result.grads.all_finite()) {
    throw DivergenceError("critic loss or gradient is not finite");
  }
  return result;
}

template <typename T>
CriticLoss<T> wgan_critic_loss(const Mlp<T>& critic, const Matrix<T>& real,
                               const Matrix<T>& fake, T lambda_gp,
                               std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<T> mix(static_cast<std::size_t>(real.rows()));
  for (auto& e : mix) e = static_cast<T>(u(rng));
  return wgan_critic_loss<T>(critic, real, fake, lambda_gp,
                             std::span<const T>(mix));
}

template <typename T>
GeneratorEncoderLoss<T> generator_encoder_loss(
    const Mlp<T>& generator, const Mlp<T>& critic, const Mlp<T>& encoder,
    const Matrix<T>& z_n, std::span<const int> speakers, int num_speakers,
    const LossWeights& weights) {
  const auto m = z_n.rows();
  const auto d_n = z_n.cols();
  if (m == 0) throw DimensionError("generator loss on an empty batch");
  if (static_cast<std::size_t>(m) != speakers.size()) {
    throw DimensionError("generator loss: one speaker index per row needed");
  }
  if (encoder.output_dim() != d_n + num_speakers) {
    throw DimensionError("encoder output width " +
                         std::to_string(encoder.output_dim()) +
                         " != d_n + d_c = " + std::to_string(d_n + num_speakers));
  }
  const T a = static_cast<T>(weights.adversarial);
  const T b = static_cast<T>(weights.cosine);
  const T c = static_cast<T>(weights.cross_entropy);
  const T inv_m = T(1) / static_cast<T>(m);

  Matrix<T> z(m, d_n + num_speakers);
  z.leftCols(d_n) = z_n;
  z.rightCols(num_speakers) = one_hot_rows<T>(speakers, num_speakers);

  GeneratorEncoderLoss<T> out;
  const auto gcache = forward(generator, z);
  const Matrix<T>& fake = gcache.output;

  const auto dcache = forward(critic, fake);
  out.adversarial = -dcache.output.mean();
  const Matrix<T> d_grad = Matrix<T>::Constant(m, 1, -a * inv_m);
  Matrix<T> fake_grad = backward(critic, dcache, d_grad).input;

  const auto ecache = forward(encoder, fake);
  const Matrix<T> z_n_hat = ecache.output.leftCols(d_n);
  const Matrix<T> logits = ecache.output.rightCols(num_speakers);
  const auto cos = cosine_recovery_loss<T>(z_n, z_n_hat);
  const auto ce = cluster_ce_from_logits<T>(speakers, logits, &out.ce_clamped);
  out.cosine = cos.loss;
  out.cross_entropy = ce.loss;

  Matrix<T> e_grad(m, d_n + num_speakers);
  e_grad.leftCols(d_n) = b * cos.grad;
  e_grad.rightCols(num_speakers) = c * ce.grad;
  auto eres = backward(encoder, ecache, e_grad);
  out.encoder = std::move(eres.params);
  fake_grad += eres.input;

  out.generator = backward(generator, gcache, fake_grad).params;
  out.total = a * out.adversarial + b * out.cosine + c * out.cross_entropy;

  if (!std::isfinite(static_cast<double>(out.total)) ||
      !out.generator.all_finite() || !out.encoder.all_finite()) {
    throw DivergenceError("generator/encoder loss or gradient is not finite");
  }
  return out;
}

#define LATENTDIAR_INSTANTIATE_LOSSES(T)                                      \
  template Matrix<T> one_hot_rows<T>(std::span<const int>, int);              \
  template LossGrad<T> cosine_recovery_loss(const Matrix<T>&,                 \
                                            const Matrix<T>&);                \
  template Matrix<T> softmax_rows(const Matrix<T>&);                          \
  template T cluster_ce_loss(const Matrix<T>&, const Matrix<T>&,              \
                             std::int64_t*);                                  \
  template LossGrad<T> cluster_ce_from_logits(std::span<const int>,           \
                                              const Matrix<T>&,               \
                                              std::int64_t*);                 \
  template T gradient_penalty(const Mlp<T>&, const Matrix<T>&);               \
  template CriticLoss<T> wgan_critic_loss(const Mlp<T>&, const Matrix<T>&,    \
                                          const Matrix<T>&, T,                \
                                          std::span<const T>);                \
  template CriticLoss<T> wgan_critic_loss(const Mlp<T>&, const Matrix<T>&,    \
                                          const Matrix<T>&, T,                \
                                          std::mt19937_64&);                  \
  template GeneratorEncoderLoss<T> generator_encoder_loss(                    \
      const Mlp<T>&, const Mlp<T>&, const Mlp<T>&, const Matrix<T>&,          \
      std::span<const int>, int, const LossWeights&);

LATENTDIAR_INSTANTIATE_LOSSES(float)
LATENTDIAR_INSTANTIATE_LOSSES(double)

#undef LATENTDIAR_INSTANTIATE_LOSSES

}  // namespace latentdiar
