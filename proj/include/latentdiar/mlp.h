// latentdiar/mlp.h
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

#ifndef LATENTDIAR_MLP_H_
#define LATENTDIAR_MLP_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "latentdiar/tensor.h"

namespace latentdiar {

enum class Activation { kLinear, kRelu };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

template <typename T>
struct DenseLayer {
  Matrix<T> weight;  // out x in
  RowVector<T> bias;  // 1 x out
  Activation activation = Activation::kLinear;

  int in_dim() const { return static_cast<int>(weight.cols()); }
  int out_dim() const { return static_cast<int>(weight.rows()); }
};

// Feed-forward stack of affine layers, each followed by its activation.
template <typename T>
class Mlp {
 public:
  Mlp() = default;
  // Throws DimensionError unless consecutive layers chain.
  explicit Mlp(std::vector<DenseLayer<T>> layers);

  // dims = {in, hidden..., out}. Hidden layers use ReLU, the last layer uses
  // `output`. Weights are uniform in +-sqrt(6 / fan_in) for ReLU layers and
  // +-sqrt(3 / fan_in) for linear ones; biases start at zero.
  static Mlp create(std::span<const int> dims, Activation output,
                    std::uint64_t seed);

  const std::vector<DenseLayer<T>>& layers() const { return layers_; }
  std::vector<DenseLayer<T>>& mutable_layers() { return layers_; }
  std::size_t num_layers() const { return layers_.size(); }

  int input_dim() const;
  int output_dim() const;
  std::int64_t param_count() const;

  template <typename U>
  Mlp<U> cast() const {
    std::vector<DenseLayer<U>> out;
    out.reserve(layers_.size());
    for (const auto& l : layers_) {
      out.push_back({l.weight.template cast<U>(), l.bias.template cast<U>(),
                     l.activation});
    }
    return Mlp<U>(std::move(out));
  }

  bool operator==(const Mlp& other) const;

 private:
  std::vector<DenseLayer<T>> layers_;
};

// Activations retained by forward() for the backward passes.
template <typename T>
struct ForwardCache {
  std::vector<Matrix<T>> inputs;           // input to each layer
  std::vector<Matrix<T>> pre_activations;  // affine output of each layer
  Matrix<T> output;
};

// Gradients (or any per-parameter quantity) laid out like an Mlp.
template <typename T>
struct MlpGradients {
  std::vector<Matrix<T>> weight;
  std::vector<RowVector<T>> bias;

  static MlpGradients zeros_like(const Mlp<T>& model);
  void add(const MlpGradients& other, T scale = T(1));
  void scale(T s);
  bool all_finite() const;
  // Flattened view used by gradient checks: weights then bias per layer.
  std::vector<T> flatten() const;
};

template <typename T>
struct BackwardResult {
  MlpGradients<T> params;
  Matrix<T> input;  // gradient with respect to the input batch
};

template <typename T>
ForwardCache<T> forward(const Mlp<T>& model, const Matrix<T>& batch);

// Output only; identical arithmetic to forward().
template <typename T>
Matrix<T> predict(const Mlp<T>& model, const Matrix<T>& batch);

template <typename T>
BackwardResult<T> backward(const Mlp<T>& model, const ForwardCache<T>& cache,
                           const Matrix<T>& output_grad);

// Gradient of a scalar-output network with respect to its input, one row per
// batch item, plus the intermediate sensitivities needed to differentiate it
// again. Activations must be piecewise linear (they are: ReLU and linear), so
// the result is multilinear in the weights with the ReLU masks held fixed.
template <typename T>
struct InputGradient {
  Matrix<T> value;                       // m x in
  std::vector<Matrix<T>> sensitivities;  // d(out)/d(pre-activation) per layer
};

template <typename T>
InputGradient<T> input_gradient(const Mlp<T>& model,
                                const ForwardCache<T>& cache);

// Parameter gradients of a loss L(input_gradient) given dL/d(input_gradient).
// Biases only move the ReLU kinks, so their gradients are zero.
template <typename T>
MlpGradients<T> input_gradient_backward(const Mlp<T>& model,
                                        const ForwardCache<T>& cache,
                                        const InputGradient<T>& grad,
                                        const Matrix<T>& upstream);

}  // namespace latentdiar

#endif  // LATENTDIAR_MLP_H_
