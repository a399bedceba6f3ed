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

#ifndef BCSE_LOSS_HPP_
#define BCSE_LOSS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bcse/tensor.hpp"

namespace bcse {

// Mean softmax cross-entropy over the batch, max-shifted for stability.
template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> labels) {
  if (logits.rank() != 2) throw Error(Errc::shape_mismatch, "logits must be [N,K], got " + shape_str(logits.shape()));
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  if (labels.size() != n)
    throw Error(Errc::shape_mismatch, std::to_string(labels.size()) + " labels for a batch of " + std::to_string(n));
  for (int l : labels)
    if (l < 0 || static_cast<std::size_t>(l) >= k)
      throw Error(Errc::invalid_label, "label " + std::to_string(l) + " outside [0, " + std::to_string(k) + ")");
  const T* z = logits.data().data();
  std::vector<T> probs(n * k);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = z + i * k;
    const T mx = *std::max_element(row, row + k);
    double denom = 0.0;
    for (std::size_t j = 0; j < k; ++j) denom += std::exp(static_cast<double>(row[j] - mx));
    for (std::size_t j = 0; j < k; ++j) probs[i * k + j] = static_cast<T>(std::exp(static_cast<double>(row[j] - mx)) / denom);
    total += std::log(denom) - static_cast<double>(row[labels[i]] - mx);
  }
  NodePtr<T> nz = logits.node();
  std::vector<int> ids(labels.begin(), labels.end());
  return detail::make_result<T>({1}, {static_cast<T>(total / static_cast<double>(n))}, {nz},
                                [nz, probs = std::move(probs), ids = std::move(ids), n, k](TensorNode<T>& o) {
                                  if (!nz->requires_grad) return;
                                  auto& g = nz->grad_buffer();
                                  const T scale = o.grad[0] / static_cast<T>(n);
                                  for (std::size_t i = 0; i < n; ++i)
                                    for (std::size_t j = 0; j < k; ++j) {
                                      const T target = static_cast<int>(j) == ids[i] ? T(1) : T(0);
                                      g[i * k + j] += scale * (probs[i * k + j] - target);
                                    }
                                });
}

// Row-wise softmax of a [N, K] value, no tape.
template <typename T>
std::vector<double> softmax_rows(const Tensor<T>& logits) {
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  std::vector<double> out(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = logits.data().data() + i * k;
    const double mx = *std::max_element(row, row + k);
    double denom = 0.0;
    for (std::size_t j = 0; j < k; ++j) denom += std::exp(row[j] - mx);
    for (std::size_t j = 0; j < k; ++j) out[i * k + j] = std::exp(row[j] - mx) / denom;
  }
  return out;
}

template <typename T>
std::vector<int> argmax_rows(const Tensor<T>& logits) {
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = logits.data().data() + i * k;
    out[i] = static_cast<int>(std::max_element(row, row + k) - row);
  }
  return out;
}

}  // namespace bcse

#endif  // BCSE_LOSS_HPP_
