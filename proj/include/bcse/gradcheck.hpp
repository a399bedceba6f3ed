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

// Finite-difference verification of the analytic gradients.
//
// Each check builds a small double-precision instance of a component, draws
// a fixed random projection w and differentiates loss = sum(w * output).
// A plain sum is avoided because normalization layers make it constant,
// which would leave nothing to compare. Every input element and a random
// 5% of each parameter tensor are perturbed by +-eps.

#ifndef BCSE_GRADCHECK_HPP_
#define BCSE_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "bcse/attention.hpp"
#include "bcse/bc_block.hpp"
#include "bcse/conv.hpp"
#include "bcse/loss.hpp"
#include "bcse/model.hpp"
#include "bcse/norm.hpp"
#include "bcse/ops.hpp"

namespace bcse {

// Gradients smaller than this are compared in absolute terms.
inline constexpr double kGradCheckFloor = 1e-6;
// Two difference quotients closer than this are taken as kink free.
inline constexpr double kGradCheckAgreement = 1e-6;
inline constexpr double kGradCheckNoise = 1e-8;
inline constexpr int kGradCheckRefinements = 3;

struct GradCheckResult {
  std::string component;
  double max_rel_error = 0.0;
  std::string location;  // "<tensor>[<flat index>]" of the worst element
  std::size_t checked = 0;
  std::size_t refined = 0;  // elements that needed a smaller step
};

inline double relative_error(double analytic, double numeric, double floor = kGradCheckFloor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

struct GradLeaf {
  std::string name;
  Tensor<double> tensor;
  double sample_fraction = 1.0;  // share of elements perturbed
};

// Core comparison. `forward` must be a pure function of the leaves' data.
inline GradCheckResult check_gradients(const std::string& component, const std::function<Tensor<double>()>& forward,
                                       std::vector<GradLeaf> leaves, double eps = 1e-4, std::uint64_t seed = 11) {
  Tensor<double> projection;
  auto loss_of = [&](const Tensor<double>& out) {
    if (!projection.defined()) projection = Tensor<double>::uniform(out.shape(), -1.0, 1.0, mix_seed(seed, 1));
    return sum(mul(out, projection));
  };
  for (auto& leaf : leaves) {
    leaf.tensor.set_requires_grad(true);
    leaf.tensor.zero_grad();
  }
  std::vector<std::vector<double>> analytic;
  {
    Tape<double> tape;
    TapeScope<double> scope(tape);
    const Tensor<double> loss = loss_of(forward());
    tape.backward(loss);
    for (auto& leaf : leaves) {
      const auto g = leaf.tensor.grad();
      analytic.emplace_back(g.begin(), g.end());
      if (analytic.back().empty()) analytic.back().assign(leaf.tensor.numel(), 0.0);
    }
  }
  auto eval = [&] {
    NoGradScope<double> no_grad;
    return loss_of(forward()).item();
  };

  GradCheckResult result;
  result.component = component;
  Rng rng(mix_seed(seed, 2));
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    GradLeaf& leaf = leaves[li];
    const std::size_t n = leaf.tensor.numel();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::size_t take = n;
    if (leaf.sample_fraction < 1.0) {
      take = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(leaf.sample_fraction * static_cast<double>(n))));
      for (std::size_t i = 0; i < take; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
      std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
    }
    for (std::size_t k = 0; k < take; ++k) {
      const std::size_t i = idx[k];
      const double original = leaf.tensor.data()[i];
      auto central = [&](double h) {
        leaf.tensor.mutable_data()[i] = original + h;
        const double up = eval();
        leaf.tensor.mutable_data()[i] = original - h;
        const double down = eval();
        leaf.tensor.mutable_data()[i] = original;
        return (up - down) / (2.0 * h);
      };
      // A step that straddles a relu kink makes the difference quotient
      // depend on the step itself; shrink until three step sizes agree.
      auto agrees = [](double a, double b) {
        return std::abs(a - b) <= kGradCheckAgreement * std::max(std::abs(a), std::abs(b)) + kGradCheckNoise;
      };
      double h = eps;
      double numeric = central(h);
      for (int attempt = 0; attempt < kGradCheckRefinements; ++attempt) {
        if (agrees(numeric, central(h / 2.0)) && agrees(numeric, central(h / 5.0))) break;
        if (attempt == 0) ++result.refined;
        h /= 10.0;
        numeric = central(h);
      }
      const double err = relative_error(analytic[li][i], numeric);
      ++result.checked;
      if (err > result.max_rel_error || result.location.empty()) {
        result.max_rel_error = err;
        result.location = leaf.name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return result;
}

namespace detail {

inline Tensor<double> random_input(const Shape& shape, std::uint64_t seed) {
  return Tensor<double>::uniform(shape, -1.0, 1.0, seed);
}

inline Shape or_default(const Shape& given, Shape fallback) { return given.empty() ? std::move(fallback) : given; }

inline Tensor<double> random_param(const Shape& shape, std::uint64_t seed, double scale = 0.5) {
  return Tensor<double>::uniform(shape, -scale, scale, seed);
}

// Norm state with non-trivial affine terms and running statistics.
inline NormState<double> random_norm(std::size_t groups, std::uint64_t seed) {
  NormState<double> s(groups);
  s.gamma = Tensor<double>::uniform({groups}, 0.5, 1.5, mix_seed(seed, 1));
  s.beta = Tensor<double>::uniform({groups}, -0.5, 0.5, mix_seed(seed, 2));
  s.running_mean = Tensor<double>::uniform({groups}, -0.2, 0.2, mix_seed(seed, 3));
  s.running_var = Tensor<double>::uniform({groups}, 0.5, 1.5, mix_seed(seed, 4));
  return s;
}

inline void randomize_block(BcResBlock<double>& b, std::uint64_t seed) {
  std::uint64_t k = 0;
  b.for_each_param("", [&](const std::string& name, Tensor<double>& t, bool decayed) {
    const bool is_gamma = name.ends_with("gamma");
    const double lo = decayed ? -0.7 : is_gamma ? 0.5 : -0.3;
    const double hi = decayed ? 0.7 : is_gamma ? 1.5 : 0.3;
    t = Tensor<double>::uniform(t.shape(), lo, hi, mix_seed(seed, ++k));
  });
}

}  // namespace detail

inline const std::vector<std::string>& grad_check_components() {
  static const std::vector<std::string> names{
      "add_broadcast", "mul_broadcast", "relu",          "sigmoid",           "reduce_mean", "matmul",
      "linear",        "permute",       "conv2d",        "conv2d_strided",    "conv2d_depthwise",
      "batchnorm2d",   "batchnorm2d_eval", "subspectral_norm", "dropout", "se_block", "tfwse_block",
      "bc_resblock",   "bc_resblock_transition", "cross_entropy", "model"};
  return names;
}

// Runs the named check. `input_shape` overrides the default input geometry
// where the component accepts arbitrary [N, C, F, T] shapes.
inline GradCheckResult grad_check(const std::string& component, const Shape& input_shape = {}, double eps = 1e-4,
                                  std::uint64_t seed = 7) {
  using detail::or_default;
  using detail::random_input;
  using detail::random_param;
  const std::uint64_t s = mix_seed(seed, fnv1a(component));

  if (component == "add_broadcast" || component == "mul_broadcast") {
    Tensor<double> a = random_input(or_default(input_shape, {2, 3, 4, 5}), mix_seed(s, 1));
    Shape bshape = a.shape();
    bshape[bshape.size() > 2 ? 2 : 0] = 1;
    Tensor<double> b = random_input(bshape, mix_seed(s, 2));
    const bool is_add = component == "add_broadcast";
    return check_gradients(component, [=] { return is_add ? add(a, b) : mul(a, b); }, {{"a", a}, {"b", b}}, eps);
  }
  if (component == "relu" || component == "sigmoid") {
    Tensor<double> x = random_input(or_default(input_shape, {2, 3, 4, 5}), mix_seed(s, 1));
    // Keep relu inputs away from the kink so +-eps never crosses it.
    if (component == "relu")
      for (double& v : x.mutable_data()) v = v >= 0 ? v + 0.01 : v - 0.01;
    const bool is_relu = component == "relu";
    return check_gradients(component, [=] { return is_relu ? relu(x) : sigmoid(x); }, {{"x", x}}, eps);
  }
  if (component == "reduce_mean") {
    Tensor<double> x = random_input(or_default(input_shape, {2, 3, 4, 5}), mix_seed(s, 1));
    return check_gradients(component, [=] { return reduce_mean(x, {1, 3}, true); }, {{"x", x}}, eps);
  }
  if (component == "matmul") {
    Tensor<double> a = random_input({3, 4}, mix_seed(s, 1));
    Tensor<double> b = random_input({4, 2}, mix_seed(s, 2));
    return check_gradients(component, [=] { return matmul(a, b); }, {{"a", a}, {"b", b}}, eps);
  }
  if (component == "linear") {
    Tensor<double> x = random_input({5, 6}, mix_seed(s, 1));
    Tensor<double> w = random_param({6, 3}, mix_seed(s, 2));
    Tensor<double> b = random_param({3}, mix_seed(s, 3));
    return check_gradients(component, [=] { return add(matmul(x, w), b); }, {{"x", x}, {"w", w}, {"b", b}}, eps);
  }
  if (component == "permute") {
    Tensor<double> x = random_input(or_default(input_shape, {2, 3, 4, 5}), mix_seed(s, 1));
    return check_gradients(component, [=] { return permute(x, {0, 2, 3, 1}); }, {{"x", x}}, eps);
  }
  if (component == "conv2d" || component == "conv2d_strided" || component == "conv2d_depthwise") {
    Tensor<double> x = random_input(or_default(input_shape, {2, 4, 7, 9}), mix_seed(s, 1));
    const std::size_t c = x.dim(1);
    ConvSpec spec{.in_channels = c, .out_channels = 6, .kf = 3, .kt = 3, .pf = 1, .pt = 1};
    if (component == "conv2d_strided") {
      spec = {.in_channels = c, .out_channels = 4, .kf = 3, .kt = 2, .sf = 2, .st = 1, .df = 1, .dt = 2, .pf = 1,
              .pt = 2, .groups = 2};
    } else if (component == "conv2d_depthwise") {
      spec = {.in_channels = c, .out_channels = c, .kf = 1, .kt = 3, .dt = 2, .pt = 2, .groups = c};
    }
    Tensor<double> w = random_param(spec.weight_shape(), mix_seed(s, 2));
    Tensor<double> b = random_param({spec.out_channels}, mix_seed(s, 3));
    return check_gradients(component, [=] { return conv2d(x, spec, w, b); }, {{"x", x}, {"weight", w}, {"bias", b}},
                           eps);
  }
  if (component == "batchnorm2d" || component == "batchnorm2d_eval" || component == "subspectral_norm") {
    Tensor<double> x = random_input(or_default(input_shape, {3, 4, 10, 6}), mix_seed(s, 1));
    const std::size_t subbands = component == "subspectral_norm" ? 5 : 1;
    const Mode mode = component == "batchnorm2d_eval" ? Mode::eval : Mode::train;
    auto state = std::make_shared<NormState<double>>(detail::random_norm(x.dim(1) * subbands, mix_seed(s, 2)));
    return check_gradients(
        component, [=] { return subspectral_norm(x, *state, subbands, mode); },
        {{"x", x}, {"gamma", state->gamma}, {"beta", state->beta}}, eps);
  }
  if (component == "dropout") {
    Tensor<double> x = random_input(or_default(input_shape, {2, 3, 4, 5}), mix_seed(s, 1));
    return check_gradients(component, [=] { return dropout(x, 0.1, Mode::train, 99); }, {{"x", x}}, eps);
  }
  if (component == "se_block" || component == "tfwse_block") {
    Tensor<double> x = random_input(or_default(input_shape, {2, 8, 6, 5}), mix_seed(s, 1));
    const bool se = component == "se_block";
    const std::size_t width = se ? x.dim(1) : x.dim(2);
    auto p = std::make_shared<ExcitationParams<double>>(width, se ? se_hidden(width, 4) : tfwse_hidden(width, 4));
    p->w1 = random_param(p->w1.shape(), mix_seed(s, 2), 1.0);
    p->b1 = random_param(p->b1.shape(), mix_seed(s, 3), 0.3);
    p->w2 = random_param(p->w2.shape(), mix_seed(s, 4), 1.0);
    p->b2 = random_param(p->b2.shape(), mix_seed(s, 5), 0.3);
    return check_gradients(
        component, [=] { return se ? se_block(x, *p) : tfwse_block(x, *p); },
        {{"x", x}, {"w1", p->w1}, {"b1", p->b1}, {"w2", p->w2}, {"b2", p->b2}}, eps);
  }
  if (component == "bc_resblock" || component == "bc_resblock_transition") {
    const bool transition = component == "bc_resblock_transition";
    Tensor<double> x = random_input(or_default(input_shape, {2, 8, 5, 7}), mix_seed(s, 1));
    const std::size_t c = x.dim(1);
    auto block = std::make_shared<BcResBlock<double>>(
        transition ? make_bc_resblock<double>(BlockKind::transition, c, c + 4, 2, 2, 1, 0.0)
                   : make_bc_resblock<double>(BlockKind::normal, c, c, 1, 2, x.dim(2) % 5 == 0 ? 5 : 1, 0.0));
    detail::randomize_block(*block, mix_seed(s, 2));
    std::vector<GradLeaf> leaves{{"x", x}};
    block->for_each_param("", [&](const std::string& name, Tensor<double>& t, bool) { leaves.push_back({name, t}); });
    return check_gradients(component, [=] { return bc_resblock(x, *block, Mode::train); }, std::move(leaves), eps);
  }
  if (component == "cross_entropy") {
    Tensor<double> z = random_input({6, 12}, mix_seed(s, 1));
    const std::vector<int> labels{0, 3, 11, 5, 5, 7};
    return check_gradients(component, [=] { return cross_entropy(z, std::span<const int>(labels)); }, {{"logits", z}},
                           eps);
  }
  if (component == "model") {
    ModelConfig cfg;
    cfg.tau = 1.0;
    cfg.dropout = 0.0;
    cfg.frames = 20;
    cfg.seed = s;
    auto model = std::make_shared<BcSeNet<double>>(cfg);
    // Attention and norm parameters start at trivial values; perturb them so
    // every path carries gradient.
    std::uint64_t k = 0;
    model->for_each_param([&](const std::string& name, Tensor<double>& t, bool decayed) {
      if (decayed) return;
      const bool is_gamma = name.ends_with("gamma");
      t = Tensor<double>::uniform(t.shape(), is_gamma ? 0.5 : -0.3, is_gamma ? 1.5 : 0.3, mix_seed(s, 100 + ++k));
    });
    Tensor<double> x = random_input(or_default(input_shape, {2, 1, 40, 20}), mix_seed(s, 1));
    std::vector<GradLeaf> leaves{{"input", x}};
    model->for_each_param(
        [&](const std::string& name, Tensor<double>& t, bool) { leaves.push_back({name, t, 0.05}); });
    return check_gradients(component, [=] { return model->forward(x, Mode::train); }, std::move(leaves), eps);
  }
  throw Error(Errc::invalid_argument, "unknown gradcheck component '" + component + "'");
}

}  // namespace bcse

#endif  // BCSE_GRADCHECK_HPP_
