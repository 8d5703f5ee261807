// tests/gradient_check.h
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

// Central finite-difference oracle for MLP parameter gradients. Test-only;
// it only ever evaluates losses, never calls a backward routine.

#ifndef LATENTDIAR_TESTS_GRADIENT_CHECK_H_
#define LATENTDIAR_TESTS_GRADIENT_CHECK_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "latentdiar/mlp.h"

namespace latentdiar::testing {

inline constexpr double kFiniteDifferenceStep = 1e-4;
inline constexpr double kGradientRelTol = 1e-4;
// Components smaller than this are compared on an absolute scale; central
// differences cannot resolve them relatively.
inline constexpr double kGradientFloor = 1e-6;
// Cases whose ReLU pre-activations come closer than this to 0 are skipped.
inline constexpr double kMinReluMargin = 1e-3;

// Numerical gradient of `loss` w.r.t. every parameter of `model`, flattened in
// MlpGradients::flatten() order (weights then bias, layer by layer).
inline std::vector<double> numeric_gradient(
    Mlp<double> model, const std::function<double(const Mlp<double>&)>& loss,
    double h = kFiniteDifferenceStep) {
  std::vector<double> out;
  auto probe = [&](double& p) {
    const double saved = p;
    p = saved + h;
    const double up = loss(model);
    p = saved - h;
    const double down = loss(model);
    p = saved;
    out.push_back((up - down) / (2 * h));
  };
  for (auto& layer : model.mutable_layers()) {
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i)
      probe(layer.weight.data()[i]);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i)
      probe(layer.bias.data()[i]);
  }
  return out;
}

inline std::vector<double> numeric_input_gradient(
    Matrix<double> input, const std::function<double(const Matrix<double>&)>& f,
    double h = kFiniteDifferenceStep) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < input.size(); ++i) {
    const double saved = input.data()[i];
    input.data()[i] = saved + h;
    const double up = f(input);
    input.data()[i] = saved - h;
    const double down = f(input);
    input.data()[i] = saved;
    out.push_back((up - down) / (2 * h));
  }
  return out;
}

inline double relative_error(double analytic, double numeric) {
  const double scale =
      std::max({std::abs(analytic), std::abs(numeric), kGradientFloor});
  return std::abs(analytic - numeric) / scale;
}

inline double max_relative_error(const std::vector<double>& analytic,
                                 const std::vector<double>& numeric) {
  if (analytic.size() != numeric.size()) return INFINITY;
  double worst = 0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, relative_error(analytic[i], numeric[i]));
  }
  return worst;
}

// Smallest |pre-activation| of any ReLU unit on `batch`. Finite differences
// are only meaningful when no unit sits within the probe step of its kink.
inline double min_relu_margin(const Mlp<double>& model,
                              const Matrix<double>& batch) {
  double margin = INFINITY;
  const auto cache = forward(model, batch);
  for (std::size_t i = 0; i < model.num_layers(); ++i) {
    if (model.layers()[i].activation != Activation::kRelu) continue;
    margin = std::min(margin, cache.pre_activations[i].cwiseAbs().minCoeff());
  }
  return margin;
}

inline Matrix<double> random_matrix(std::mt19937_64& rng, Eigen::Index rows,
                                    Eigen::Index cols, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix<double> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

// Random MLP with ReLU hidden layers and random (non-zero) biases.
inline Mlp<double> random_mlp(std::mt19937_64& rng, std::vector<int> dims,
                              Activation output = Activation::kLinear) {
  auto model = Mlp<double>::create(dims, output, rng());
  std::normal_distribution<double> n(0.0, 0.3);
  for (auto& l : model.mutable_layers()) {
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = n(rng);
  }
  return model;
}

}  // namespace latentdiar::testing

#endif  // LATENTDIAR_TESTS_GRADIENT_CHECK_H_
