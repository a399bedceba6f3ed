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

#ifndef BCSE_OPS_HPP_
#define BCSE_OPS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bcse/tensor.hpp"

namespace bcse {

enum class EwKind { add, sub, mul, relu, sigmoid };

namespace detail {

// Trailing-aligned broadcast of two shapes.
inline Shape broadcast_shape(const Shape& a, const Shape& b) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::size_t ea = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const std::size_t eb = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (ea != eb && ea != 1 && eb != 1)
      throw Error(Errc::shape_mismatch,
                  "cannot broadcast " + shape_str(a) + " with " + shape_str(b));
    out[i] = std::max(ea, eb);
  }
  return out;
}

// Strides of `in` laid over `out`, zero on broadcast axes.
inline std::vector<std::size_t> broadcast_strides(const Shape& in, const Shape& out) {
  std::vector<std::size_t> strides(out.size(), 0);
  std::size_t stride = 1;
  for (std::size_t k = in.size(); k-- > 0;) {
    const std::size_t axis = k + (out.size() - in.size());
    strides[axis] = in[k] == 1 ? 0 : stride;
    stride *= in[k];
  }
  return strides;
}

// Odometer over `out` calling fn(flat_out, offset_a, offset_b).
template <typename Fn>
void for_each_broadcast(const Shape& out, const std::vector<std::size_t>& sa,
                        const std::vector<std::size_t>& sb, Fn&& fn) {
  const std::size_t rank = out.size();
  const std::size_t total = shape_numel(out);
  std::vector<std::size_t> idx(rank, 0);
  std::size_t ia = 0, ib = 0;
  const std::size_t inner = out[rank - 1];
  const std::size_t inner_sa = sa[rank - 1], inner_sb = sb[rank - 1];
  for (std::size_t flat = 0; flat < total; flat += inner) {
    std::size_t a = ia, b = ib;
    for (std::size_t j = 0; j < inner; ++j, a += inner_sa, b += inner_sb) fn(flat + j, a, b);
    for (std::size_t k = rank - 1; k-- > 0;) {
      ++idx[k];
      ia += sa[k];
      ib += sb[k];
      if (idx[k] < out[k]) break;
      ia -= sa[k] * out[k];
      ib -= sb[k] * out[k];
      idx[k] = 0;
    }
  }
}

template <typename T>
Tensor<T> binary(EwKind kind, const Tensor<T>& a, const Tensor<T>& b) {
  const Shape out_shape = broadcast_shape(a.shape(), b.shape());
  const auto sa = broadcast_strides(a.shape(), out_shape);
  const auto sb = broadcast_strides(b.shape(), out_shape);
  const T* pa = a.data().data();
  const T* pb = b.data().data();
  std::vector<T> out(shape_numel(out_shape));
  const bool same = a.shape() == b.shape();
  auto apply = [&](auto op) {
    if (same) {
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(pa[i], pb[i]);
    } else {
      for_each_broadcast(out_shape, sa, sb,
                         [&](std::size_t o, std::size_t i, std::size_t j) { out[o] = op(pa[i], pb[j]); });
    }
  };
  switch (kind) {
    case EwKind::add: apply([](T x, T y) { return x + y; }); break;
    case EwKind::sub: apply([](T x, T y) { return x - y; }); break;
    case EwKind::mul: apply([](T x, T y) { return x * y; }); break;
    default: throw Error(Errc::invalid_argument, "not a binary kind");
  }
  NodePtr<T> na = a.node(), nb = b.node();
  return make_result<T>(out_shape, std::move(out), {na, nb}, [na, nb, kind, out_shape, sa, sb, same](TensorNode<T>& o) {
    const std::vector<T>& gy = o.grad;
    T* ga = na->requires_grad ? na->grad_buffer().data() : nullptr;
    T* gb = nb->requires_grad ? nb->grad_buffer().data() : nullptr;
    const T* xa = na->data.data();
    const T* xb = nb->data.data();
    auto each = [&](auto fn) {
      if (same) {
        for (std::size_t i = 0; i < gy.size(); ++i) fn(i, i, i);
      } else {
        for_each_broadcast(out_shape, sa, sb, fn);
      }
    };
    switch (kind) {
      case EwKind::add:
        each([&](std::size_t k, std::size_t i, std::size_t j) {
          if (ga) ga[i] += gy[k];
          if (gb) gb[j] += gy[k];
        });
        break;
      case EwKind::sub:
        each([&](std::size_t k, std::size_t i, std::size_t j) {
          if (ga) ga[i] += gy[k];
          if (gb) gb[j] -= gy[k];
        });
        break;
      case EwKind::mul:
        each([&](std::size_t k, std::size_t i, std::size_t j) {
          if (ga) ga[i] += gy[k] * xb[j];
          if (gb) gb[j] += gy[k] * xa[i];
        });
        break;
      default: break;
    }
  });
}

template <typename T>
Tensor<T> unary(EwKind kind, const Tensor<T>& x) {
  std::span<const T> in = x.data();
  std::vector<T> out(in.size());
  if (kind == EwKind::relu) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > T(0) ? in[i] : T(0);
  } else if (kind == EwKind::sigmoid) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = T(1) / (T(1) + std::exp(-in[i]));
  } else {
    throw Error(Errc::invalid_argument, "not a unary kind");
  }
  NodePtr<T> nx = x.node();
  return make_result<T>(x.shape(), std::move(out), {nx}, [nx, kind](TensorNode<T>& o) {
    if (!nx->requires_grad) return;
    auto& gx = nx->grad_buffer();
    const auto& gy = o.grad;
    if (kind == EwKind::relu) {
      for (std::size_t i = 0; i < gy.size(); ++i)
        if (nx->data[i] > T(0)) gx[i] += gy[i];
    } else {
      for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * o.data[i] * (T(1) - o.data[i]);
    }
  });
}

}  // namespace detail

// Elementwise primitive. Binary kinds broadcast with trailing alignment and
// their backward sums the gradient over broadcast axes.
template <typename T>
Tensor<T> ew_op(EwKind kind, const Tensor<T>& a, const Tensor<T>* b = nullptr) {
  const bool binary = kind == EwKind::add || kind == EwKind::sub || kind == EwKind::mul;
  if (binary) {
    if (b == nullptr) throw Error(Errc::invalid_argument, "binary elementwise op needs two operands");
    return detail::binary(kind, a, *b);
  }
  return detail::unary(kind, a);
}

template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) { return detail::binary(EwKind::add, a, b); }
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) { return detail::binary(EwKind::sub, a, b); }
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) { return detail::binary(EwKind::mul, a, b); }
template <typename T> Tensor<T> relu(const Tensor<T>& x) { return detail::unary(EwKind::relu, x); }
template <typename T> Tensor<T> sigmoid(const Tensor<T>& x) { return detail::unary(EwKind::sigmoid, x); }

template <typename T>
Tensor<T> reduce_mean(const Tensor<T>& x, const std::set<std::size_t>& axes, bool keep_dims) {
  const Shape& in = x.shape();
  for (std::size_t a : axes)
    if (a >= in.size())
      throw Error(Errc::invalid_axis, "axis " + std::to_string(a) + " out of range for rank " +
                                          std::to_string(in.size()));
  Shape kept = in;
  std::size_t count = 1;
  for (std::size_t a : axes) {
    count *= in[a];
    kept[a] = 1;
  }
  // Output strides laid over the input index space.
  const auto so = detail::broadcast_strides(kept, in);
  const std::vector<std::size_t> zero(in.size(), 0);
  std::vector<double> acc(shape_numel(kept), 0.0);
  const T* px = x.data().data();
  detail::for_each_broadcast(in, so, zero, [&](std::size_t i, std::size_t o, std::size_t) { acc[o] += px[i]; });
  std::vector<T> out(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<T>(acc[i] / static_cast<double>(count));

  Shape out_shape;
  if (keep_dims) {
    out_shape = kept;
  } else {
    for (std::size_t a = 0; a < in.size(); ++a)
      if (!axes.contains(a)) out_shape.push_back(in[a]);
    if (out_shape.empty()) out_shape = {1};
  }
  NodePtr<T> nx = x.node();
  const Shape in_shape = in;
  return detail::make_result<T>(out_shape, std::move(out), {nx}, [nx, in_shape, so, zero, count](TensorNode<T>& o) {
    if (!nx->requires_grad) return;
    auto& gx = nx->grad_buffer();
    const T scale = T(1) / static_cast<T>(count);
    detail::for_each_broadcast(in_shape, so, zero,
                               [&](std::size_t i, std::size_t k, std::size_t) { gx[i] += o.grad[k] * scale; });
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  double acc = 0.0;
  for (T v : x.data()) acc += v;
  NodePtr<T> nx = x.node();
  return detail::make_result<T>({1}, {static_cast<T>(acc)}, {nx}, [nx](TensorNode<T>& o) {
    if (!nx->requires_grad) return;
    auto& gx = nx->grad_buffer();
    for (T& g : gx) g += o.grad[0];
  });
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2)
    throw Error(Errc::shape_mismatch, "matmul needs rank-2 operands, got " + shape_str(a.shape()) + " and " +
                                          shape_str(b.shape()));
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k)
    throw Error(Errc::shape_mismatch, "matmul inner extents differ: " + shape_str(a.shape()) + " x " +
                                          shape_str(b.shape()));
  std::vector<T> out(m * n, T(0));
  const T* pa = a.data().data();
  const T* pb = b.data().data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const T av = pa[i * k + p];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += av * pb[p * n + j];
    }
  NodePtr<T> na = a.node(), nb = b.node();
  return detail::make_result<T>({m, n}, std::move(out), {na, nb}, [na, nb, m, k, n](TensorNode<T>& o) {
    const T* gy = o.grad.data();
    if (na->requires_grad) {  // dA = dY * B^T
      T* ga = na->grad_buffer().data();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          T acc = 0;
          for (std::size_t j = 0; j < n; ++j) acc += gy[i * n + j] * nb->data[p * n + j];
          ga[i * k + p] += acc;
        }
    }
    if (nb->requires_grad) {  // dB = A^T * dY
      T* gb = nb->grad_buffer().data();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const T av = na->data[i * k + p];
          for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += av * gy[i * n + j];
        }
    }
  });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  check_shape(shape);
  if (shape_numel(shape) != x.numel())
    throw Error(Errc::shape_mismatch, "cannot reshape " + shape_str(x.shape()) + " to " + shape_str(shape));
  NodePtr<T> nx = x.node();
  std::vector<T> data(x.data().begin(), x.data().end());
  return detail::make_result<T>(std::move(shape), std::move(data), {nx},
                                [nx](TensorNode<T>& o) { nx->accumulate(o.grad); });
}

// Axis permutation: output axis i is input axis perm[i].
template <typename T>
Tensor<T> permute(const Tensor<T>& x, const std::vector<std::size_t>& perm) {
  const Shape& in = x.shape();
  if (perm.size() != in.size()) throw Error(Errc::invalid_axis, "permutation rank mismatch");
  std::vector<bool> seen(in.size(), false);
  for (std::size_t p : perm) {
    if (p >= in.size() || seen[p]) throw Error(Errc::invalid_axis, "invalid permutation");
    seen[p] = true;
  }
  Shape out_shape(in.size());
  std::vector<std::size_t> in_strides(in.size());
  std::size_t s = 1;
  for (std::size_t k = in.size(); k-- > 0;) {
    in_strides[k] = s;
    s *= in[k];
  }
  std::vector<std::size_t> gather(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    out_shape[i] = in[perm[i]];
    gather[i] = in_strides[perm[i]];
  }
  const std::vector<std::size_t> zero(in.size(), 0);
  std::vector<T> out(x.numel());
  const T* px = x.data().data();
  detail::for_each_broadcast(out_shape, gather, zero, [&](std::size_t o, std::size_t i, std::size_t) { out[o] = px[i]; });
  NodePtr<T> nx = x.node();
  return detail::make_result<T>(out_shape, std::move(out), {nx}, [nx, out_shape, gather, zero](TensorNode<T>& o) {
    if (!nx->requires_grad) return;
    auto& gx = nx->grad_buffer();
    detail::for_each_broadcast(out_shape, gather, zero,
                               [&](std::size_t k, std::size_t i, std::size_t) { gx[i] += o.grad[k]; });
  });
}

}  // namespace bcse

#endif  // BCSE_OPS_HPP_
