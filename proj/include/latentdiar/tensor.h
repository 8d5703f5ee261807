// latentdiar/tensor.h
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

#ifndef LATENTDIAR_TENSOR_H_
#define LATENTDIAR_TENSOR_H_

#include <string>

#include <Eigen/Core>

#include "latentdiar/errors.h"

namespace latentdiar {

// Dense row-major matrices. Rows are batch items throughout the library.
template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

// Training precision. Verification code instantiates the same templates with
// double.
using Tensor = Matrix<float>;
using Tensor64 = Matrix<double>;

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

template <typename A, typename B>
void require_same_shape(const Eigen::DenseBase<A>& a,
                        const Eigen::DenseBase<B>& b, const std::string& what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(what + ": shape " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

}  // namespace latentdiar

#endif  // LATENTDIAR_TENSOR_H_
