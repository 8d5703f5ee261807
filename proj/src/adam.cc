// latentdiar/adam.cc
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

#include "latentdiar/adam.h"

#include <cmath>

namespace latentdiar {

namespace {

template <typename T, typename P>
void update(P& param, const P& grad, P& m, P& v, T beta1, T beta2, T step,
            T correction1, T correction2, T eps) {
  m = beta1 * m + (T(1) - beta1) * grad;
  v = beta2 * v + (T(1) - beta2) * grad.cwiseProduct(grad);
  param.array() -= step * (m.array() / correction1) /
                   ((v.array() / correction2).sqrt() + eps);
}

}  // namespace

template <typename T>
void adam_step(Mlp<T>& model, const MlpGradients<T>& grads,
               AdamState<T>& state) {
  auto& layers = model.mutable_layers();
  if (grads.weight.size() != layers.size() ||
      state.first_moment.weight.size() != layers.size()) {
    throw DimensionError("adam_step: gradient/state layer count mismatch");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    require_same_shape(layers[i].weight, grads.weight[i], "adam_step weight");
    require_same_shape(layers[i].bias, grads.bias[i], "adam_step bias");
    require_same_shape(layers[i].weight, state.first_moment.weight[i],
                       "adam_step moment");
  }
  if (!grads.all_finite()) {
    throw DivergenceError("non-finite gradient at Adam step " +
                          std::to_string(state.step_count + 1));
  }

  const auto& c = state.config;
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const T correction1 = static_cast<T>(1.0 - std::pow(c.beta1, t));
  const T correction2 = static_cast<T>(1.0 - std::pow(c.beta2, t));
  const T beta1 = static_cast<T>(c.beta1);
  const T beta2 = static_cast<T>(c.beta2);
  const T alpha = static_cast<T>(c.alpha);
  const T eps = static_cast<T>(c.epsilon);

  for (std::size_t i = 0; i < layers.size(); ++i) {
    update<T>(layers[i].weight, grads.weight[i], state.first_moment.weight[i],
              state.second_moment.weight[i], beta1, beta2, alpha, correction1,
              correction2, eps);
    update<T>(layers[i].bias, grads.bias[i], state.first_moment.bias[i],
              state.second_moment.bias[i], beta1, beta2, alpha, correction1,
              correction2, eps);
  }
}

template void adam_step(Mlp<float>&, const MlpGradients<float>&,
                        AdamState<float>&);
template void adam_step(Mlp<double>&, const MlpGradients<double>&,
                        AdamState<double>&);

}  // namespace latentdiar
