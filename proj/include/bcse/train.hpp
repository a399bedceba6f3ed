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

#ifndef BCSE_TRAIN_HPP_
#define BCSE_TRAIN_HPP_

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bcse/batches.hpp"
#include "bcse/checkpoint.hpp"
#include "bcse/loss.hpp"
#include "bcse/model.hpp"
#include "bcse/noise.hpp"
#include "bcse/optim.hpp"

namespace bcse {

inline constexpr std::uint64_t kEvalPlanSeed = 0xe7a1;

struct StepResult {
  double loss = 0.0;
  std::size_t correct = 0;
  std::size_t count = 0;
};

// One optimizer update on a batch: forward (train mode), cross-entropy,
// backward, step at learning rate `lr`.
template <typename T>
StepResult train_step(BcSeNet<T>& model, const Tensor<T>& features, std::span<const int> labels,
                      std::vector<NamedParam<T>>& params, OptimizerState<T>& state, double lr,
                      const OptimConfig& cfg, std::size_t step_index) {
  StepResult r;
  {
    Tape<T> tape;
    TapeScope<T> scope(tape);
    model.zero_grad();
    const Tensor<T> logits = model.forward(features, Mode::train);
    const Tensor<T> loss = cross_entropy(logits, labels);
    r.loss = static_cast<double>(loss.item());
    if (!std::isfinite(r.loss))
      throw Error(Errc::divergence, "non-finite loss at step " + std::to_string(step_index));
    tape.backward(loss);
    const auto pred = argmax_rows(logits);
    for (std::size_t i = 0; i < pred.size(); ++i) r.correct += pred[i] == labels[i];
    r.count = labels.size();
  }
  optimizer_step(params, state, lr, cfg);
  return r;
}

struct EvalOptions {
  std::size_t batch_size = 100;
  PlanOptions plan;
  std::uint64_t plan_seed = kEvalPlanSeed;
};

struct EvalResult {
  double accuracy = 0.0;  // percent
  std::size_t correct = 0;
  std::size_t total = 0;
};

// Eval-mode argmax accuracy over a split, optionally after a waveform transform.
template <typename T>
EvalResult evaluate_detailed(BcSeNet<T>& model, const ExampleLoader& loader, Split split, const EvalOptions& opts = {},
                             ClipTransform transform = {}) {
  auto plan = plan_epoch(loader.manifest(), split, opts.plan_seed, opts.plan);
  if (plan.empty()) throw Error(Errc::empty_split, std::string("split '") + to_string(split) + "' has no examples");
  if (loader.manifest().num_classes() != model.config().num_classes)
    throw Error(Errc::invalid_config, "manifest has " + std::to_string(loader.manifest().num_classes()) +
                                          " classes, model " + std::to_string(model.config().num_classes));
  NoGradScope<T> no_grad;
  BatchSequence<T> seq(loader, std::move(plan), opts.batch_size, std::move(transform));
  EvalResult r;
  for (std::size_t b = 0; b < seq.size(); ++b) {
    const Batch<T> batch = seq[b];
    const auto pred = argmax_rows(model.forward(batch.features, Mode::eval));
    for (std::size_t i = 0; i < pred.size(); ++i) r.correct += pred[i] == batch.labels[i];
    r.total += pred.size();
  }
  r.accuracy = 100.0 * static_cast<double>(r.correct) / static_cast<double>(r.total);
  return r;
}

template <typename T>
double evaluate(BcSeNet<T>& model, const ExampleLoader& loader, Split split, const EvalOptions& opts = {}) {
  return evaluate_detailed(model, loader, split, opts).accuracy;
}

// Accuracy on in-memory features, eval mode.
template <typename T>
double evaluate_tensors(BcSeNet<T>& model, const Tensor<T>& features, std::span<const int> labels) {
  NoGradScope<T> no_grad;
  const auto pred = argmax_rows(model.forward(features, Mode::eval));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == labels[i];
  return 100.0 * static_cast<double>(correct) / static_cast<double>(pred.size());
}

struct NoiseResult {
  double snr_db;
  double accuracy;
};

// Noise for the `level`-th SNR of an evaluation run; the clip position in the
// plan picks the noise seed. An infinite SNR gives an empty transform. Clips
// without energy (a silence example whose gain came out as zero) have no
// defined SNR and are left clean.
inline ClipTransform noise_transform(double snr, NoiseKind kind, std::uint64_t seed, std::size_t level) {
  if (!std::isfinite(snr)) return {};
  return [snr, kind, seed, level](const AudioClip& clip, std::size_t position) {
    if (!(mean_power(clip) > 0.0)) return clip;
    const AudioClip noise = colored_noise(clip.size(), kind, mix_seed(mix_seed(seed, level), position));
    return mix_at_snr(clip, noise, snr);
  };
}

// Accuracy with every evaluated clip mixed with fresh colored noise, per SNR.
template <typename T>
std::vector<NoiseResult> eval_noise(BcSeNet<T>& model, const ExampleLoader& loader, Split split,
                                    const std::vector<double>& snrs, NoiseKind kind, std::uint64_t seed,
                                    const EvalOptions& opts = {}) {
  std::vector<NoiseResult> out;
  for (std::size_t k = 0; k < snrs.size(); ++k)
    out.push_back({snrs[k], evaluate_detailed(model, loader, split, opts, noise_transform(snrs[k], kind, seed, k))
                                .accuracy});
  return out;
}

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;  // at the first step of the epoch
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = std::numeric_limits<double>::quiet_NaN();
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;
  double best_val_acc = std::numeric_limits<double>::quiet_NaN();
  std::size_t best_epoch = 0;

  static std::string format_record(const EpochRecord& r) {
    std::ostringstream os;
    os << std::setprecision(9) << r.epoch << ' ' << r.lr << ' ' << r.train_loss << ' ' << r.train_acc << ' ';
    if (std::isnan(r.val_acc)) os << "nan";
    else os << r.val_acc;
    return os.str();
  }

  // One line per epoch: epoch lr train_loss train_acc val_acc.
  std::string to_text() const {
    std::ostringstream os;
    os << "# seed=" << seed << '\n';
    for (const auto& [k, v] : config) os << "# " << k << '=' << v << '\n';
    os << "# epoch lr train_loss train_acc val_acc\n";
    for (const auto& r : epochs) os << format_record(r) << '\n';
    os << "# wall_seconds=" << wall_seconds << '\n';
    return os.str();
  }
};

struct TrainOptions {
  OptimConfig optim;
  std::uint64_t seed = 0;
  PlanOptions plan;
  std::filesystem::path checkpoint;  // best-validation checkpoint; empty disables
  bool cache_features = true;
  std::size_t eval_batch_size = 100;
  std::ostream* log = nullptr;
};

inline std::filesystem::path history_path(const std::filesystem::path& checkpoint) {
  return checkpoint.string() + ".history";
}

// Full training run. Every epoch draws a fresh seeded plan, steps through it
// and scores the validation split; the best-scoring weights are saved.
template <typename T>
TrainHistory train(BcSeNet<T>& model, const DatasetManifest& manifest, const TrainOptions& opts) {
  opts.optim.validate();
  if (manifest.num_classes() != model.config().num_classes)
    throw Error(Errc::invalid_config, "manifest has " + std::to_string(manifest.num_classes()) + " classes, model " +
                                          std::to_string(model.config().num_classes));
  const auto start = std::chrono::steady_clock::now();
  ExampleLoader loader(manifest, opts.cache_features);
  auto params = model.parameters();
  OptimizerState<T> state;
  state.kind = opts.optim.kind;

  TrainHistory history;
  history.seed = opts.seed;
  history.config = model.config().to_kv();
  history.config.emplace_back("optimizer", to_string(opts.optim.kind));
  history.config.emplace_back("schedule", to_string(opts.optim.schedule));
  history.config.emplace_back("epochs", std::to_string(opts.optim.epochs));
  history.config.emplace_back("batch_size", std::to_string(opts.optim.batch_size));
  const bool has_val = !plan_epoch(manifest, Split::val, kEvalPlanSeed, opts.plan).empty();
  EvalOptions eval_opts{opts.eval_batch_size, opts.plan, kEvalPlanSeed};

  std::size_t steps_per_epoch = 0;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < opts.optim.epochs; ++epoch) {
    auto seq = batches<T>(loader, Split::train, opts.optim.batch_size, mix_seed(opts.seed, epoch + 1), opts.plan);
    if (seq.num_examples() == 0) throw Error(Errc::empty_split, "training split has no examples");
    if (steps_per_epoch == 0) steps_per_epoch = seq.size();
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.lr = lr_at(step, steps_per_epoch, opts.optim);
    double loss_sum = 0.0;
    std::size_t correct = 0, seen = 0;
    for (std::size_t b = 0; b < seq.size(); ++b, ++step) {
      const Batch<T> batch = seq[b];
      const double lr = lr_at(step, steps_per_epoch, opts.optim);
      const StepResult r = train_step(model, batch.features, batch.labels, params, state, lr, opts.optim, step);
      loss_sum += r.loss * static_cast<double>(r.count);
      correct += r.correct;
      seen += r.count;
    }
    rec.train_loss = loss_sum / static_cast<double>(seen);
    rec.train_acc = 100.0 * static_cast<double>(correct) / static_cast<double>(seen);
    if (has_val) rec.val_acc = evaluate(model, loader, Split::val, eval_opts);
    history.epochs.push_back(rec);
    if (opts.log) *opts.log << "epoch " << TrainHistory::format_record(rec) << std::endl;

    const bool improved = has_val && (std::isnan(history.best_val_acc) || rec.val_acc > history.best_val_acc);
    if (improved) {
      history.best_val_acc = rec.val_acc;
      history.best_epoch = rec.epoch;
    }
    const bool last = epoch + 1 == opts.optim.epochs;
    if (!opts.checkpoint.empty() && (improved || (!has_val && last))) save_checkpoint(model, &state, opts.checkpoint);
  }
  history.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!opts.checkpoint.empty()) {
    std::ofstream out(history_path(opts.checkpoint));
    out << history.to_text();
  }
  return history;
}

}  // namespace bcse

#endif  // BCSE_TRAIN_HPP_
