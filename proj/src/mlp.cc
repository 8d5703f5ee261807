// latentdiar/mlp.cc
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

#include "latentdiar/mlp.h"

#include <cmath>
#include <random>

namespace latentdiar {

std::string activation_name(Activation a) {
  return a == Activation::kRelu ? "relu" : "linear";
}

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "linear") return Activation::kLinear;
  throw FormatError("unknown activation '" + name + "'");
}

namespace {

template <typename T>
void apply_activation(Activation a, Matrix<T>* z) {
  if (a == Activation::kRelu) *z = z->cwiseMax(T(0));
}

// Derivative of the activation evaluated at the pre-activation. The ReLU
// subgradient at exactly zero is zero.
template <typename T>
Matrix<T> activation_mask(Activation a, const Matrix<T>& z) {
  if (a == Activation::kRelu) return (z.array() > T(0)).template cast<T>();
  return Matrix<T>::Ones(z.rows(), z.cols());
}

template <typename T>
void check_cache(const Mlp<T>& model, const ForwardCache<T>& cache) {
  if (cache.inputs.size() != model.num_layers() ||
      cache.pre_activations.size() != model.num_layers() ||
      model.num_layers() == 0) {
    throw StateError("backward pass needs the activations retained by forward");
  }
}

}  // namespace

template <typename T>
Mlp<T>::Mlp(std::vector<DenseLayer<T>> layers) : layers_(std::move(layers)) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.bias.cols() != l.weight.rows()) {
      throw DimensionError("layer " + std::to_string(i) +
                           ": bias length does not match output dim");
    }
    if (i > 0 && layers_[i - 1].out_dim() != l.in_dim()) {
      throw DimensionError("layer " + std::to_string(i) + " expects " +
                           std::to_string(l.in_dim()) + " inputs, previous "
                           "layer produces " +
                           std::to_string(layers_[i - 1].out_dim()));
    }
  }
}

template <typename T>
Mlp<T> Mlp<T>::create(std::span<const int> dims, Activation output,
                      std::uint64_t seed) {
  if (dims.size() < 2) throw ConfigError("an MLP needs at least two dims");
  for (int d : dims) {
    if (d <= 0) throw ConfigError("MLP dims must be positive");
  }
  std::mt19937_64 rng(seed);
  std::vector<DenseLayer<T>> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const int in = dims[i], out = dims[i + 1];
    const Activation act =
        (i + 2 == dims.size()) ? output : Activation::kRelu;
    const double gain = act == Activation::kRelu ? 6.0 : 3.0;
    std::uniform_real_distribution<double> u(-std::sqrt(gain / in),
                                             std::sqrt(gain / in));
    DenseLayer<T> layer;
    layer.weight.resize(out, in);
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) layer.weight(r, c) = static_cast<T>(u(rng));
    layer.bias = RowVector<T>::Zero(out);
    layer.activation = act;
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers));
}

template <typename T>
int Mlp<T>::input_dim() const {
  return layers_.empty() ? 0 : layers_.front().in_dim();
}

template <typename T>
int Mlp<T>::output_dim() const {
  return layers_.empty() ? 0 : layers_.back().out_dim();
}

template <typename T>
std::int64_t Mlp<T>::param_count() const {
  std::int64_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

template <typename T>
bool Mlp<T>::operator==(const Mlp& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& a = layers_[i];
    const auto& b = other.layers_[i];
    if (a.activation != b.activation || a.weight.rows() != b.weight.rows() ||
        a.weight.cols() != b.weight.cols() || a.weight != b.weight ||
        a.bias != b.bias) {
      return false;
    }
  }
  return true;
}

template <typename T>
MlpGradients<T> MlpGradients<T>::zeros_like(const Mlp<T>& model) {
  MlpGradients g;
  for (const auto& l : model.layers()) {
    g.weight.push_back(Matrix<T>::Zero(l.weight.rows(), l.weight.cols()));
    g.bias.push_back(RowVector<T>::Zero(l.bias.cols()));
  }
  return g;
}

template <typename T>
void MlpGradients<T>::add(const MlpGradients& other, T s) {
  if (other.weight.size() != weight.size()) {
    throw DimensionError("gradient sets have different layer counts");
  }
  for (std::size_t i = 0; i < weight.size(); ++i) {
    require_same_shape(weight[i], other.weight[i], "gradient add");
    weight[i] += s * other.weight[i];
    bias[i] += s * other.bias[i];
  }
}

template <typename T>
void MlpGradients<T>::scale(T s) {
  for (auto& w : weight) w *= s;
  for (auto& b : bias) b *= s;
}

template <typename T>
bool MlpGradients<T>::all_finite() const {
  for (const auto& w : weight)
    if (!w.allFinite()) return false;
  for (const auto& b : bias)
    if (!b.allFinite()) return false;
  return true;
}

template <typename T>
std::vector<T> MlpGradients<T>::flatten() const {
  std::vector<T> out;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    out.insert(out.end(), weight[i].data(), weight[i].data() + weight[i].size());
    out.insert(out.end(), bias[i].data(), bias[i].data() + bias[i].size());
  }
  return out;
}

template <typename T>
ForwardCache<T> forward(const Mlp<T>& model, const Matrix<T>& batch) {
  if (model.num_layers() == 0) throw StateError("forward on an empty model");
  if (batch.cols() != model.input_dim()) {
    throw DimensionError("batch width " + std::to_string(batch.cols()) +
                         " does not match model input dim " +
                         std::to_string(model.input_dim()));
  }
  ForwardCache<T> cache;
  cache.inputs.reserve(model.num_layers());
  cache.pre_activations.reserve(model.num_layers());
  Matrix<T> a = batch;
  for (const auto& layer : model.layers()) {
    Matrix<T> z = a * layer.weight.transpose();
    z.rowwise() += layer.bias;
    cache.inputs.push_back(std::move(a));
    a = z;
    apply_activation(layer.activation, &a);
    cache.pre_activations.push_back(std::move(z));
  }
  cache.output = std::move(a);
  return cache;
}

template <typename T>
Matrix<T> predict(const Mlp<T>& model, const Matrix<T>& batch) {
  if (model.num_layers() == 0) throw StateError("predict on an empty model");
  if (batch.cols() != model.input_dim()) {
    throw DimensionError("batch width " + std::to_string(batch.cols()) +
                         " does not match model input dim " +
                         std::to_string(model.input_dim()));
  }
  Matrix<T> a = batch;
  for (const auto& layer : model.layers()) {
    Matrix<T> z = a * layer.weight.transpose();
    z.rowwise() += layer.bias;
    apply_activation(layer.activation, &z);
    a = std::move(z);
  }
  return a;
}

template <typename T>
BackwardResult<T> backward(const Mlp<T>& model, const ForwardCache<T>& cache,
                           const Matrix<T>& output_grad) {
  check_cache(model, cache);
  require_same_shape(output_grad, cache.output, "backward output gradient");
  BackwardResult<T> result;
  result.params.weight.resize(model.num_layers());
  result.params.bias.resize(model.num_layers());
  Matrix<T> grad = output_grad;
  for (std::size_t i = model.num_layers(); i-- > 0;) {
    const auto& layer = model.layers()[i];
    if (layer.activation == Activation::kRelu) {
      grad = grad.cwiseProduct(
          activation_mask(layer.activation, cache.pre_activations[i]));
    }
    result.params.weight[i] = grad.transpose() * cache.inputs[i];
    result.params.bias[i] = grad.colwise().sum();
    grad = grad * layer.weight;
  }
  result.input = std::move(grad);
  return result;
}

template <typename T>
InputGradient<T> input_gradient(const Mlp<T>& model,
                                const ForwardCache<T>& cache) {
  check_cache(model, cache);
  if (model.output_dim() != 1) {
    throw DimensionError("input gradient requires a scalar-output network");
  }
  const auto m = cache.output.rows();
  const std::size_t n = model.num_layers();
  InputGradient<T> g;
  g.sensitivities.resize(n);
  Matrix<T> delta = Matrix<T>::Ones(m, 1);
  for (std::size_t i = n; i-- > 0;) {
    const auto& layer = model.layers()[i];
    g.sensitivities[i] = delta.cwiseProduct(
        activation_mask(layer.activation, cache.pre_activations[i]));
    delta = g.sensitivities[i] * layer.weight;
  }
  g.value = std::move(delta);
  return g;
}

template <typename T>
MlpGradients<T> input_gradient_backward(const Mlp<T>& model,
                                        const ForwardCache<T>& cache,
                                        const InputGradient<T>& grad,
                                        const Matrix<T>& upstream) {
  check_cache(model, cache);
  require_same_shape(upstream, grad.value, "input gradient upstream");
  MlpGradients<T> out = MlpGradients<T>::zeros_like(model);
  // value = s_0 W_0, s_i = (s_{i+1} W_{i+1}) * mask_i, s_last = mask_last.
  Matrix<T> d_delta = upstream;
  const std::size_t n = model.num_layers();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& layer = model.layers()[i];
    out.weight[i] = grad.sensitivities[i].transpose() * d_delta;
    if (i + 1 == n) break;
    Matrix<T> d_s = d_delta * layer.weight.transpose();
    d_delta = d_s.cwiseProduct(
        activation_mask(layer.activation, cache.pre_activations[i]));
  }
  return out;
}

#define LATENTDIAR_INSTANTIATE_MLP(T)                                         \
  template class Mlp<T>;                                                      \
  template struct MlpGradients<T>;                                            \
  template ForwardCache<T> forward(const Mlp<T>&, const Matrix<T>&);          \
  template Matrix<T> predict(const Mlp<T>&, const Matrix<T>&);                \
  template BackwardResult<T> backward(const Mlp<T>&, const ForwardCache<T>&,  \
                                      const Matrix<T>&);                      \
  template InputGradient<T> input_gradient(const Mlp<T>&,                     \
                                           const ForwardCache<T>&);           \
  template MlpGradients<T> input_gradient_backward(                           \
      const Mlp<T>&, const ForwardCache<T>&, const InputGradient<T>&,         \
      const Matrix<T>&);

LATENTDIAR_INSTANTIATE_MLP(float)
LATENTDIAR_INSTANTIATE_MLP(double)

#undef LATENTDIAR_INSTANTIATE_MLP

}  // namespace latentdiar
