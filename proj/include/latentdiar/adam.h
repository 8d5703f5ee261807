// latentdiar/adam.h
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

#ifndef LATENTDIAR_ADAM_H_
#define LATENTDIAR_ADAM_H_

#include <cstdint>

#include "latentdiar/mlp.h"

namespace latentdiar {

struct AdamConfig {
  double alpha = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  AdamConfig config;
  MlpGradients<T> first_moment;
  MlpGradients<T> second_moment;
  std::int64_t step_count = 0;

  static AdamState init(const Mlp<T>& model, const AdamConfig& config) {
    return {config, MlpGradients<T>::zeros_like(model),
            MlpGradients<T>::zeros_like(model), 0};
  }
};

// One bias-corrected Adam update of every parameter of `model`.
// Throws DivergenceError (before touching anything) if a gradient is not
// finite, DimensionError if the shapes disagree.
template <typename T>
void adam_step(Mlp<T>& model, const MlpGradients<T>& grads,
               AdamState<T>& state);

}  // namespace latentdiar

#endif  // LATENTDIAR_ADAM_H_
