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

#ifndef BCSE_OPTIM_HPP_
#define BCSE_OPTIM_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "bcse/model.hpp"

namespace bcse {

enum class OptimKind { sgd_momentum, adam };
enum class ScheduleKind { warmup_cosine, constant };

inline const char* to_string(OptimKind k) { return k == OptimKind::adam ? "adam" : "sgd_momentum"; }
inline const char* to_string(ScheduleKind k) { return k == ScheduleKind::constant ? "constant" : "warmup_cosine"; }

struct OptimConfig {
  OptimKind kind = OptimKind::sgd_momentum;
  ScheduleKind schedule = ScheduleKind::warmup_cosine;
  double lr_peak = 0.1;
  double momentum = 0.9;
  double weight_decay = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t epochs = 200;
  std::size_t warmup_epochs = 5;
  std::size_t batch_size = 100;

  // 200 epochs of momentum SGD, linear warmup to 0.1 over 5 epochs, cosine to 0.
  static OptimConfig sgd200() { return {}; }

  // 50 epochs of Adam at a constant 1e-3, batch 64.
  static OptimConfig adam50() {
    OptimConfig c;
    c.kind = OptimKind::adam;
    c.schedule = ScheduleKind::constant;
    c.lr_peak = 1e-3;
    c.epochs = 50;
    c.warmup_epochs = 0;
    c.batch_size = 64;
    return c;
  }

  void validate() const {
    if (!(lr_peak > 0.0)) throw Error(Errc::invalid_config, "lr_peak must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw Error(Errc::invalid_config, "momentum must be in [0, 1)");
    if (!(weight_decay >= 0.0)) throw Error(Errc::invalid_config, "weight_decay must be >= 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
      throw Error(Errc::invalid_config, "Adam betas must be in [0, 1)");
    if (epochs == 0 || batch_size == 0) throw Error(Errc::invalid_config, "epochs and batch_size must be positive");
    if (schedule == ScheduleKind::warmup_cosine && warmup_epochs >= epochs)
      throw Error(Errc::invalid_config, "warmup must be shorter than training");
  }
};

// Linear warmup from 0 to lr_peak over warmup_epochs, then cosine annealing
// that reaches exactly 0 at the final step.
inline double lr_at(std::size_t step, std::size_t steps_per_epoch, const OptimConfig& cfg) {
  if (cfg.schedule == ScheduleKind::constant) return cfg.lr_peak;
  const double warmup = static_cast<double>(cfg.warmup_epochs * steps_per_epoch);
  const double total = static_cast<double>(cfg.epochs * steps_per_epoch);
  const double s = static_cast<double>(step);
  if (s < warmup) return cfg.lr_peak * s / warmup;
  if (s >= total) return 0.0;
  return cfg.lr_peak * 0.5 * (1.0 + std::cos(std::numbers::pi * (s - warmup) / (total - warmup)));
}

template <typename T>
struct OptimizerState {
  OptimKind kind = OptimKind::sgd_momentum;
  std::uint64_t step = 0;               // completed updates
  std::vector<std::vector<T>> first;    // SGD velocity or Adam m
  std::vector<std::vector<T>> second;   // Adam v

  void ensure(const std::vector<NamedParam<T>>& params) {
    if (first.empty()) {
      for (const auto& p : params) first.emplace_back(p.tensor.numel(), T(0));
      if (kind == OptimKind::adam)
        for (const auto& p : params) second.emplace_back(p.tensor.numel(), T(0));
    }
    const bool adam = kind == OptimKind::adam;
    if (first.size() != params.size() || (adam && second.size() != params.size()))
      throw Error(Errc::state_corruption, "optimizer state holds " + std::to_string(first.size()) +
                                              " buffers for " + std::to_string(params.size()) + " parameters");
    for (std::size_t i = 0; i < params.size(); ++i)
      if (first[i].size() != params[i].tensor.numel() || (adam && second[i].size() != params[i].tensor.numel()))
        throw Error(Errc::state_corruption, "optimizer buffer size differs for " + params[i].name);
  }
};

namespace detail {

// Gradient plus L2 decay for decayed tensors; a tensor without gradient
// contributes zeros.
template <typename T>
T decayed_grad(const NamedParam<T>& p, std::span<const T> grad, std::size_t i, double wd, std::span<const T> data) {
  const T g = grad.empty() ? T(0) : grad[i];
  return p.decayed ? g + static_cast<T>(wd) * data[i] : g;
}

}  // namespace detail

// v <- momentum*v + (g + wd*w); w <- w - lr*v
template <typename T>
void sgd_step(std::vector<NamedParam<T>>& params, OptimizerState<T>& state, double lr, const OptimConfig& cfg) {
  if (state.kind != OptimKind::sgd_momentum) throw Error(Errc::state_corruption, "SGD step on Adam state");
  state.ensure(params);
  for (std::size_t k = 0; k < params.size(); ++k) {
    NamedParam<T>& p = params[k];
    const std::span<const T> grad = p.tensor.grad();
    std::span<T> w = p.tensor.mutable_data();
    std::vector<T>& v = state.first[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const T g = detail::decayed_grad<T>(p, grad, i, cfg.weight_decay, w);
      v[i] = static_cast<T>(cfg.momentum) * v[i] + g;
      w[i] -= static_cast<T>(lr) * v[i];
    }
  }
  ++state.step;
}

// Bias-corrected Adam with L2 decay folded into the gradient.
template <typename T>
void adam_step(std::vector<NamedParam<T>>& params, OptimizerState<T>& state, double lr, const OptimConfig& cfg) {
  if (state.kind != OptimKind::adam) throw Error(Errc::state_corruption, "Adam step on SGD state");
  state.ensure(params);
  const std::uint64_t t = state.step + 1;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    NamedParam<T>& p = params[k];
    const std::span<const T> grad = p.tensor.grad();
    std::span<T> w = p.tensor.mutable_data();
    std::vector<T>& m = state.first[k];
    std::vector<T>& v = state.second[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double g = detail::decayed_grad<T>(p, grad, i, cfg.weight_decay, w);
      m[i] = static_cast<T>(cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g);
      v[i] = static_cast<T>(cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g);
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      w[i] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + cfg.adam_eps));
    }
  }
  state.step = t;
}

template <typename T>
void optimizer_step(std::vector<NamedParam<T>>& params, OptimizerState<T>& state, double lr, const OptimConfig& cfg) {
  if (cfg.kind == OptimKind::adam) adam_step(params, state, lr, cfg);
  else sgd_step(params, state, lr, cfg);
}

}  // namespace bcse

#endif  // BCSE_OPTIM_HPP_
