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

#ifndef BCSE_CONV_HPP_
#define BCSE_CONV_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bcse/tensor.hpp"

namespace bcse {

// Geometry of a 2-D convolution over [N, C, F, T] activations; the first
// element of each pair acts on frequency, the second on time.
struct ConvSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kf = 1, kt = 1;
  std::size_t sf = 1, st = 1;
  std::size_t df = 1, dt = 1;
  std::size_t pf = 0, pt = 0;
  std::size_t groups = 1;

  bool depthwise() const { return groups == in_channels && groups == out_channels; }

  Shape weight_shape() const { return {out_channels, in_channels / groups, kf, kt}; }

  void validate() const {
    if (in_channels == 0 || out_channels == 0 || groups == 0 || kf == 0 || kt == 0 || sf == 0 || st == 0 ||
        df == 0 || dt == 0)
      throw Error(Errc::invalid_geometry, "conv spec has a zero field");
    if (in_channels % groups != 0 || out_channels % groups != 0)
      throw Error(Errc::shape_mismatch, "channels " + std::to_string(in_channels) + "->" +
                                            std::to_string(out_channels) + " not divisible by groups " +
                                            std::to_string(groups));
  }
};

inline std::size_t conv_output_extent(std::size_t extent, std::size_t kernel, std::size_t stride,
                                      std::size_t dilation, std::size_t pad) {
  const auto span = static_cast<std::int64_t>(dilation * (kernel - 1) + 1);
  const auto padded = static_cast<std::int64_t>(extent + 2 * pad);
  if (padded < span)
    throw Error(Errc::invalid_geometry, "kernel span " + std::to_string(span) + " exceeds padded extent " +
                                            std::to_string(padded));
  return static_cast<std::size_t>((padded - span) / static_cast<std::int64_t>(stride) + 1);
}

namespace detail {

// Output index range [lo, hi) whose tap at kernel offset k lands inside the input.
struct TapRange {
  std::size_t lo = 0, hi = 0;
};

inline std::vector<TapRange> tap_ranges(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride,
                                        std::size_t dilation, std::size_t pad) {
  std::vector<TapRange> ranges(kernel);
  const auto s = static_cast<std::int64_t>(stride);
  for (std::size_t k = 0; k < kernel; ++k) {
    const std::int64_t shift = static_cast<std::int64_t>(k * dilation) - static_cast<std::int64_t>(pad);
    // need 0 <= o*s + shift < in
    std::int64_t lo = shift >= 0 ? 0 : (-shift + s - 1) / s;
    std::int64_t hi = static_cast<std::int64_t>(in) - shift <= 0 ? 0 : (static_cast<std::int64_t>(in) - shift - 1) / s + 1;
    lo = std::min<std::int64_t>(lo, static_cast<std::int64_t>(out));
    hi = std::clamp<std::int64_t>(hi, lo, static_cast<std::int64_t>(out));
    ranges[k] = {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
  }
  return ranges;
}

struct ConvPlan {
  std::size_t n, c, h, w, o, oh, ow, cpg, opg;
  std::vector<TapRange> rows, cols;
};

}  // namespace detail

// Cross-correlation with zero padding, stride, dilation and channel groups.
// x: [N, in_c, F, T]; weight: [out_c, in_c/groups, kf, kt]; bias: [out_c] or undefined.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const ConvSpec& spec, const Tensor<T>& weight, const Tensor<T>& bias = {}) {
  spec.validate();
  if (x.rank() != 4) throw Error(Errc::shape_mismatch, "conv2d input must be [N,C,F,T], got " + shape_str(x.shape()));
  if (x.dim(1) != spec.in_channels)
    throw Error(Errc::shape_mismatch, "conv2d expects " + std::to_string(spec.in_channels) + " input channels, got " +
                                          std::to_string(x.dim(1)));
  if (weight.shape() != spec.weight_shape())
    throw Error(Errc::shape_mismatch, "conv2d weight " + shape_str(weight.shape()) + ", expected " +
                                          shape_str(spec.weight_shape()));
  if (bias.defined() && bias.shape() != Shape{spec.out_channels})
    throw Error(Errc::shape_mismatch, "conv2d bias " + shape_str(bias.shape()));

  detail::ConvPlan p;
  p.n = x.dim(0);
  p.c = x.dim(1);
  p.h = x.dim(2);
  p.w = x.dim(3);
  p.o = spec.out_channels;
  p.oh = conv_output_extent(p.h, spec.kf, spec.sf, spec.df, spec.pf);
  p.ow = conv_output_extent(p.w, spec.kt, spec.st, spec.dt, spec.pt);
  p.cpg = spec.in_channels / spec.groups;
  p.opg = spec.out_channels / spec.groups;
  p.rows = detail::tap_ranges(p.h, p.oh, spec.kf, spec.sf, spec.df, spec.pf);
  p.cols = detail::tap_ranges(p.w, p.ow, spec.kt, spec.st, spec.dt, spec.pt);

  const T* px = x.data().data();
  const T* pw = weight.data().data();
  std::vector<T> out(p.n * p.o * p.oh * p.ow, T(0));
  const std::size_t in_plane = p.h * p.w, out_plane = p.oh * p.ow;

  for (std::size_t n = 0; n < p.n; ++n)
    for (std::size_t o = 0; o < p.o; ++o) {
      T* dst = out.data() + (n * p.o + o) * out_plane;
      if (bias.defined()) std::fill(dst, dst + out_plane, bias[o]);
      const std::size_t g = o / p.opg;
      for (std::size_t ci = 0; ci < p.cpg; ++ci) {
        const T* src = px + (n * p.c + g * p.cpg + ci) * in_plane;
        const T* wk = pw + (o * p.cpg + ci) * spec.kf * spec.kt;
        for (std::size_t kh = 0; kh < spec.kf; ++kh)
          for (std::size_t kw = 0; kw < spec.kt; ++kw) {
            const T wv = wk[kh * spec.kt + kw];
            const auto [r0, r1] = p.rows[kh];
            const auto [c0, c1] = p.cols[kw];
            if (c0 >= c1) continue;
            const std::size_t first_col = c0 * spec.st + kw * spec.dt - spec.pt;
            const std::size_t count = c1 - c0;
            for (std::size_t oh = r0; oh < r1; ++oh) {
              const T* s = src + (oh * spec.sf + kh * spec.df - spec.pf) * p.w + first_col;
              T* d = dst + oh * p.ow + c0;
              if (spec.st == 1) {
                for (std::size_t j = 0; j < count; ++j) d[j] += wv * s[j];
              } else {
                for (std::size_t j = 0; j < count; ++j) d[j] += wv * s[j * spec.st];
              }
            }
          }
      }
    }

  NodePtr<T> nx = x.node(), nw = weight.node();
  std::vector<NodePtr<T>> inputs{nx, nw};
  NodePtr<T> nb = bias.defined() ? bias.node() : nullptr;
  if (nb) inputs.push_back(nb);
  return detail::make_result<T>(
      {p.n, p.o, p.oh, p.ow}, std::move(out), std::move(inputs), [nx, nw, nb, spec, p](TensorNode<T>& node) {
        const T* gy = node.grad.data();
        const std::size_t in_plane = p.h * p.w, out_plane = p.oh * p.ow;
        T* gx = nx->requires_grad ? nx->grad_buffer().data() : nullptr;
        T* gw = nw->requires_grad ? nw->grad_buffer().data() : nullptr;
        const T* px = nx->data.data();
        const T* pw = nw->data.data();
        if (nb && nb->requires_grad) {
          T* gb = nb->grad_buffer().data();
          for (std::size_t n = 0; n < p.n; ++n)
            for (std::size_t o = 0; o < p.o; ++o) {
              const T* g = gy + (n * p.o + o) * out_plane;
              T acc = 0;
              for (std::size_t i = 0; i < out_plane; ++i) acc += g[i];
              gb[o] += acc;
            }
        }
        if (!gx && !gw) return;
        for (std::size_t n = 0; n < p.n; ++n)
          for (std::size_t o = 0; o < p.o; ++o) {
            const T* g = gy + (n * p.o + o) * out_plane;
            const std::size_t grp = o / p.opg;
            for (std::size_t ci = 0; ci < p.cpg; ++ci) {
              const std::size_t in_off = (n * p.c + grp * p.cpg + ci) * in_plane;
              const std::size_t w_off = (o * p.cpg + ci) * spec.kf * spec.kt;
              for (std::size_t kh = 0; kh < spec.kf; ++kh)
                for (std::size_t kw = 0; kw < spec.kt; ++kw) {
                  const auto [r0, r1] = p.rows[kh];
                  const auto [c0, c1] = p.cols[kw];
                  const T wv = pw[w_off + kh * spec.kt + kw];
                  if (c0 >= c1) continue;
                  const std::size_t first_col = c0 * spec.st + kw * spec.dt - spec.pt;
                  const std::size_t count = c1 - c0;
                  T wacc = 0;
                  for (std::size_t oh = r0; oh < r1; ++oh) {
                    const std::size_t at = in_off + (oh * spec.sf + kh * spec.df - spec.pf) * p.w + first_col;
                    const T* grow = g + oh * p.ow + c0;
                    if (gx) {
                      T* xs = gx + at;
                      for (std::size_t j = 0; j < count; ++j) xs[j * spec.st] += wv * grow[j];
                    }
                    if (gw) {
                      const T* xs = px + at;
                      for (std::size_t j = 0; j < count; ++j) wacc += xs[j * spec.st] * grow[j];
                    }
                  }
                  if (gw) gw[w_off + kh * spec.kt + kw] += wacc;
                }
            }
          }
      });
}

}  // namespace bcse

#endif  // BCSE_CONV_HPP_
