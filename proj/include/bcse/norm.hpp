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

#ifndef BCSE_NORM_HPP_
#define BCSE_NORM_HPP_

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "bcse/mode.hpp"
#include "bcse/ops.hpp"
#include "bcse/tensor.hpp"

namespace bcse {

// Per-group affine parameters and running statistics. For plain batch norm
// there is one group per channel; sub-spectral norm uses channels*subbands.
template <typename T>
struct NormState {
  Tensor<T> gamma;
  Tensor<T> beta;
  Tensor<T> running_mean;
  Tensor<T> running_var;
  double momentum = 0.1;
  double epsilon = 1e-5;

  NormState() = default;
  explicit NormState(std::size_t groups)
      : gamma(Tensor<T>::full({groups}, T(1))),
        beta(Tensor<T>::zeros({groups})),
        running_mean(Tensor<T>::zeros({groups})),
        running_var(Tensor<T>::full({groups}, T(1))) {
    gamma.set_requires_grad(true);
    beta.set_requires_grad(true);
  }

  std::size_t groups() const { return gamma.numel(); }
};

// Batch norm applied independently to `subbands` contiguous frequency groups
// of every channel. subbands == 1 is ordinary 2-D batch norm.
template <typename T>
Tensor<T> subspectral_norm(const Tensor<T>& x, NormState<T>& state, std::size_t subbands, Mode mode) {
  if (x.rank() != 4) throw Error(Errc::shape_mismatch, "norm input must be [N,C,F,T], got " + shape_str(x.shape()));
  const std::size_t n = x.dim(0), c = x.dim(1), f = x.dim(2), t = x.dim(3);
  if (subbands == 0 || f % subbands != 0)
    throw Error(Errc::invalid_geometry, "frequency extent F=" + std::to_string(f) + " not divisible by S=" +
                                            std::to_string(subbands));
  if (state.groups() != c * subbands)
    throw Error(Errc::shape_mismatch, "norm state has " + std::to_string(state.groups()) + " groups, input needs " +
                                          std::to_string(c * subbands));
  const std::size_t band = f / subbands;
  const std::size_t groups = c * subbands;
  const std::size_t count = n * band * t;
  const T* px = x.data().data();

  // Visits the contiguous runs (length band*t) that make up group (ch, s).
  auto for_group = [n, c, f, t, band](std::size_t ch, std::size_t s, auto&& fn) {
    for (std::size_t b = 0; b < n; ++b) fn(((b * c + ch) * f + s * band) * t, band * t);
  };

  std::vector<T> mean(groups), inv_std(groups);
  if (mode == Mode::train) {
    auto rm = state.running_mean.mutable_data();
    auto rv = state.running_var.mutable_data();
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t s = 0; s < subbands; ++s) {
        double acc = 0.0;
        for_group(ch, s, [&](std::size_t off, std::size_t len) {
          for (std::size_t i = 0; i < len; ++i) acc += px[off + i];
        });
        const double mu = acc / static_cast<double>(count);
        double sq = 0.0;
        for_group(ch, s, [&](std::size_t off, std::size_t len) {
          for (std::size_t i = 0; i < len; ++i) {
            const double d = px[off + i] - mu;
            sq += d * d;
          }
        });
        const double var = sq / static_cast<double>(count);
        const std::size_t gi = ch * subbands + s;
        mean[gi] = static_cast<T>(mu);
        inv_std[gi] = static_cast<T>(1.0 / std::sqrt(var + state.epsilon));
        rm[gi] = static_cast<T>((1.0 - state.momentum) * rm[gi] + state.momentum * mu);
        rv[gi] = static_cast<T>((1.0 - state.momentum) * rv[gi] + state.momentum * var);
      }
  } else {
    const auto rm = state.running_mean.data();
    const auto rv = state.running_var.data();
    for (std::size_t gi = 0; gi < groups; ++gi) {
      mean[gi] = rm[gi];
      inv_std[gi] = static_cast<T>(1.0 / std::sqrt(static_cast<double>(rv[gi]) + state.epsilon));
    }
  }

  const T* gamma = state.gamma.data().data();
  const T* beta = state.beta.data().data();
  std::vector<T> xhat(x.numel()), out(x.numel());
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t s = 0; s < subbands; ++s) {
      const std::size_t gi = ch * subbands + s;
      const T mu = mean[gi], is = inv_std[gi], g = gamma[gi], b = beta[gi];
      for_group(ch, s, [&](std::size_t off, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) {
          const T h = (px[off + i] - mu) * is;
          xhat[off + i] = h;
          out[off + i] = g * h + b;
        }
      });
    }

  NodePtr<T> nx = x.node(), ng = state.gamma.node(), nb = state.beta.node();
  const bool train = mode == Mode::train;
  return detail::make_result<T>(
      x.shape(), std::move(out), {nx, ng, nb},
      [nx, ng, nb, xhat = std::move(xhat), inv_std, for_group, c, subbands, count, train](TensorNode<T>& o) {
        const T* gy = o.grad.data();
        T* gx = nx->requires_grad ? nx->grad_buffer().data() : nullptr;
        T* gg = ng->requires_grad ? ng->grad_buffer().data() : nullptr;
        T* gb = nb->requires_grad ? nb->grad_buffer().data() : nullptr;
        for (std::size_t ch = 0; ch < c; ++ch)
          for (std::size_t s = 0; s < subbands; ++s) {
            const std::size_t gi = ch * subbands + s;
            double sum_dy = 0.0, sum_dy_xhat = 0.0;
            for_group(ch, s, [&](std::size_t off, std::size_t len) {
              for (std::size_t i = 0; i < len; ++i) {
                sum_dy += gy[off + i];
                sum_dy_xhat += static_cast<double>(gy[off + i]) * xhat[off + i];
              }
            });
            if (gg) gg[gi] += static_cast<T>(sum_dy_xhat);
            if (gb) gb[gi] += static_cast<T>(sum_dy);
            if (!gx) continue;
            const T scale = ng->data[gi] * inv_std[gi];
            if (train) {
              const T m = static_cast<T>(count);
              const T a = static_cast<T>(sum_dy) / m;
              const T b = static_cast<T>(sum_dy_xhat) / m;
              for_group(ch, s, [&](std::size_t off, std::size_t len) {
                for (std::size_t i = 0; i < len; ++i) gx[off + i] += scale * (gy[off + i] - a - xhat[off + i] * b);
              });
            } else {
              for_group(ch, s, [&](std::size_t off, std::size_t len) {
                for (std::size_t i = 0; i < len; ++i) gx[off + i] += scale * gy[off + i];
              });
            }
          }
      });
}

template <typename T>
Tensor<T> batchnorm2d(const Tensor<T>& x, NormState<T>& state, Mode mode) {
  return subspectral_norm(x, state, 1, mode);
}

// Inverted dropout. Eval mode and p == 0 return the input itself.
template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double p, Mode mode, std::uint64_t seed) {
  if (!(p >= 0.0 && p < 1.0)) throw Error(Errc::invalid_argument, "dropout probability must be in [0, 1)");
  if (mode == Mode::eval || p == 0.0) return x;
  Rng rng(seed);
  const T keep = static_cast<T>(1.0 / (1.0 - p));
  std::vector<T> mask(x.numel());
  for (T& m : mask) m = rng.uniform() < p ? T(0) : keep;
  return mul(x, Tensor<T>(x.shape(), std::move(mask)));
}

}  // namespace bcse

#endif  // BCSE_NORM_HPP_
