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

// Broadcasted residual block.
//
//   normal:     y = relu(x + f2(x) + BC(f1(avgpool_F(f2(x)))))
//   transition: x' = relu(BN(conv1x1(x)))
//               y  = relu(f2(x') + BC(f1(avgpool_F(f2(x')))))
//
// f2 is a 3x1 frequency-depthwise conv followed by sub-spectral norm; f1 is a
// dilated 1x3 temporal-depthwise conv, batch norm, 1x1 conv and dropout. BC
// repeats the [N, C, 1, T] temporal branch across every frequency bin.

#ifndef BCSE_BC_BLOCK_HPP_
#define BCSE_BC_BLOCK_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "bcse/conv.hpp"
#include "bcse/norm.hpp"
#include "bcse/ops.hpp"

namespace bcse {

enum class BlockKind { normal, transition };

template <typename T>
struct BcResBlock {
  BlockKind kind = BlockKind::normal;
  std::size_t in_channels = 0;
  std::size_t channels = 0;
  std::size_t freq_stride = 1;
  std::size_t dilation = 1;
  std::size_t subbands = 1;
  double dropout = 0.0;

  Tensor<T> proj_weight;  // transition only
  NormState<T> proj_norm;
  Tensor<T> freq_weight;
  NormState<T> ssn;
  Tensor<T> time_weight;
  NormState<T> time_norm;
  Tensor<T> point_weight;

  ConvSpec proj_spec() const { return {.in_channels = in_channels, .out_channels = channels}; }
  ConvSpec freq_spec() const {
    return {.in_channels = channels, .out_channels = channels, .kf = 3, .kt = 1, .sf = freq_stride, .pf = 1,
            .groups = channels};
  }
  ConvSpec time_spec() const {
    return {.in_channels = channels, .out_channels = channels, .kf = 1, .kt = 3, .dt = dilation, .pt = dilation,
            .groups = channels};
  }
  ConvSpec point_spec() const { return {.in_channels = channels, .out_channels = channels}; }

  // fn(name, tensor, decayed): learnable tensors in a fixed order.
  template <typename Fn>
  void for_each_param(const std::string& prefix, Fn&& fn) {
    if (kind == BlockKind::transition) {
      fn(prefix + "proj.weight", proj_weight, true);
      fn(prefix + "proj_norm.gamma", proj_norm.gamma, false);
      fn(prefix + "proj_norm.beta", proj_norm.beta, false);
    }
    fn(prefix + "freq_conv.weight", freq_weight, true);
    fn(prefix + "ssn.gamma", ssn.gamma, false);
    fn(prefix + "ssn.beta", ssn.beta, false);
    fn(prefix + "time_conv.weight", time_weight, true);
    fn(prefix + "time_norm.gamma", time_norm.gamma, false);
    fn(prefix + "time_norm.beta", time_norm.beta, false);
    fn(prefix + "point_conv.weight", point_weight, true);
  }

  template <typename Fn>
  void for_each_buffer(const std::string& prefix, Fn&& fn) {
    if (kind == BlockKind::transition) {
      fn(prefix + "proj_norm.running_mean", proj_norm.running_mean);
      fn(prefix + "proj_norm.running_var", proj_norm.running_var);
    }
    fn(prefix + "ssn.running_mean", ssn.running_mean);
    fn(prefix + "ssn.running_var", ssn.running_var);
    fn(prefix + "time_norm.running_mean", time_norm.running_mean);
    fn(prefix + "time_norm.running_var", time_norm.running_var);
  }
};

// All weights zero, norms at identity; callers initialize afterwards.
template <typename T>
BcResBlock<T> make_bc_resblock(BlockKind kind, std::size_t in_channels, std::size_t channels,
                               std::size_t freq_stride, std::size_t dilation, std::size_t subbands, double dropout) {
  if (kind == BlockKind::normal && (in_channels != channels || freq_stride != 1))
    throw Error(Errc::invalid_config, "a normal block keeps channels and frequency extent");
  BcResBlock<T> b;
  b.kind = kind;
  b.in_channels = in_channels;
  b.channels = channels;
  b.freq_stride = freq_stride;
  b.dilation = dilation;
  b.subbands = subbands;
  b.dropout = dropout;
  auto weight = [](const ConvSpec& s) { return Tensor<T>::zeros(s.weight_shape()).set_requires_grad(true); };
  if (kind == BlockKind::transition) {
    b.proj_weight = weight(b.proj_spec());
    b.proj_norm = NormState<T>(channels);
  }
  b.freq_weight = weight(b.freq_spec());
  b.ssn = NormState<T>(channels * subbands);
  b.time_weight = weight(b.time_spec());
  b.time_norm = NormState<T>(channels);
  b.point_weight = weight(b.point_spec());
  return b;
}

template <typename T>
struct BlockBranches {
  Tensor<T> identity;  // x for normal blocks, undefined for transitions
  Tensor<T> freq;      // f2(x), [N, C, F', T]
  Tensor<T> temporal;  // f1(avgpool(f2(x))), [N, C, 1, T]
};

template <typename T>
BlockBranches<T> bc_resblock_branches(const Tensor<T>& x, BcResBlock<T>& b, Mode mode, std::uint64_t seed) {
  BlockBranches<T> out;
  Tensor<T> input = x;
  if (b.kind == BlockKind::transition) {
    input = relu(batchnorm2d(conv2d(x, b.proj_spec(), b.proj_weight), b.proj_norm, mode));
  } else {
    out.identity = x;
  }
  out.freq = subspectral_norm(conv2d(input, b.freq_spec(), b.freq_weight), b.ssn, b.subbands, mode);
  const Tensor<T> pooled = reduce_mean(out.freq, {2}, true);
  Tensor<T> temporal = batchnorm2d(conv2d(pooled, b.time_spec(), b.time_weight), b.time_norm, mode);
  temporal = conv2d(temporal, b.point_spec(), b.point_weight);
  out.temporal = dropout(temporal, b.dropout, mode, seed);
  return out;
}

template <typename T>
Tensor<T> bc_resblock(const Tensor<T>& x, BcResBlock<T>& b, Mode mode, std::uint64_t seed = 0) {
  const BlockBranches<T> br = bc_resblock_branches(x, b, mode, seed);
  Tensor<T> sum = add(br.freq, br.temporal);  // BC: broadcast over frequency
  if (br.identity.defined()) {
    if (br.identity.shape() != br.freq.shape())
      throw Error(Errc::shape_mismatch, "residual terms differ: " + shape_str(br.identity.shape()) + " vs " +
                                            shape_str(br.freq.shape()));
    sum = add(br.identity, sum);
  }
  return relu(sum);
}

}  // namespace bcse

#endif  // BCSE_BC_BLOCK_HPP_
