/* Copyright 2026 The bcse Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Channel squeeze-and-excitation (SE) and its time-frame, frequency-wise
// variant (tfwSE).
//
//   SE:    z_c = mean_{f,t} x_cft            y = sigmoid(W2 relu(W1 z + b1) + b2)
//          out_cft = x_cft * y_c
//   tfwSE: z_ft = mean_c x_cft               y_t = sigmoid(W2 relu(W1 z_t + b1) + b2)
//          out_cft = x_cft * y_ft            (one W1, W2 shared by every frame t)

#ifndef BCSE_ATTENTION_HPP_
#define BCSE_ATTENTION_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>

#include "bcse/ops.hpp"

namespace bcse {

// Two fully connected layers width -> hidden -> width. W1 is [width, hidden]
// and W2 is [hidden, width] so that a row vector z maps as z*W1.
template <typename T>
struct ExcitationParams {
  Tensor<T> w1, b1, w2, b2;

  ExcitationParams() = default;
  ExcitationParams(std::size_t width, std::size_t hidden)
      : w1(Tensor<T>::zeros({width, hidden})),
        b1(Tensor<T>::zeros({hidden})),
        w2(Tensor<T>::zeros({hidden, width})),
        b2(Tensor<T>::zeros({width})) {
    for (Tensor<T>* p : {&w1, &b1, &w2, &b2}) p->set_requires_grad(true);
  }

  std::size_t width() const { return w1.dim(0); }
  std::size_t hidden() const { return w1.dim(1); }
  std::size_t num_params() const { return w1.numel() + b1.numel() + w2.numel() + b2.numel(); }
};

template <typename T>
using SEParams = ExcitationParams<T>;
template <typename T>
using TfwSEParams = ExcitationParams<T>;

inline std::size_t se_hidden(std::size_t channels, std::size_t ratio) { return std::max<std::size_t>(channels / ratio, 4); }
inline std::size_t tfwse_hidden(std::size_t freq, std::size_t ratio) { return std::max<std::size_t>(freq / ratio, 2); }

// Rows of z ([M, width]) to gates in (0, 1), same shape.
template <typename T>
Tensor<T> excite(const Tensor<T>& z, const ExcitationParams<T>& p) {
  const Tensor<T> hidden = relu(add(matmul(z, p.w1), p.b1));
  return sigmoid(add(matmul(hidden, p.w2), p.b2));
}

// [N, C, F, T] -> [N, C]
template <typename T>
Tensor<T> se_squeeze(const Tensor<T>& x) {
  return reduce_mean(x, {2, 3}, false);
}

template <typename T>
Tensor<T> se_gates(const Tensor<T>& x, const SEParams<T>& p) {
  if (x.rank() != 4 || x.dim(1) != p.width())
    throw Error(Errc::shape_mismatch, "SE block for " + std::to_string(p.width()) + " channels got " +
                                          shape_str(x.shape()));
  return excite(se_squeeze(x), p);
}

template <typename T>
Tensor<T> se_block(const Tensor<T>& x, const SEParams<T>& p) {
  const Tensor<T> gates = se_gates(x, p);
  return mul(x, reshape(gates, {x.dim(0), x.dim(1), 1, 1}));
}

// [N, C, F, T] -> [N, F, T]
template <typename T>
Tensor<T> tfwse_squeeze(const Tensor<T>& x) {
  return reduce_mean(x, {1}, false);
}

// Gates laid out as [N, 1, F, T].
template <typename T>
Tensor<T> tfwse_gates(const Tensor<T>& x, const TfwSEParams<T>& p) {
  if (x.rank() != 4 || x.dim(2) != p.width())
    throw Error(Errc::shape_mismatch, "tfwSE block for " + std::to_string(p.width()) + " bins got " +
                                          shape_str(x.shape()));
  const std::size_t n = x.dim(0), f = x.dim(2), t = x.dim(3);
  const Tensor<T> frames = reshape(permute(tfwse_squeeze(x), {0, 2, 1}), {n * t, f});
  const Tensor<T> gates = reshape(excite(frames, p), {n, t, f});
  return reshape(permute(gates, {0, 2, 1}), {n, 1, f, t});
}

template <typename T>
Tensor<T> tfwse_block(const Tensor<T>& x, const TfwSEParams<T>& p) {
  return mul(x, tfwse_gates(x, p));
}

}  // namespace bcse

#endif  // BCSE_ATTENTION_HPP_
