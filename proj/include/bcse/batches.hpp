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

#ifndef BCSE_BATCHES_HPP_
#define BCSE_BATCHES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "bcse/dataset.hpp"
#include "bcse/features.hpp"
#include "bcse/parallel.hpp"

namespace bcse {

struct Example {
  int entry = -1;  // manifest index; -1 for generated silence
  int label = 0;
  std::uint64_t silence_seed = 0;
};

struct PlanOptions {
  double unknown_frac = 0.1;
  double silence_frac = 0.1;
};

// Examples for one pass over `split` in shuffled order. On GSC-style
// manifests the unknown class is subsampled and generated silence injected so
// that each makes up roughly its fraction of the epoch.
inline std::vector<Example> plan_epoch(const DatasetManifest& m, Split split, std::uint64_t epoch_seed,
                                       const PlanOptions& opts = {}) {
  if (opts.unknown_frac < 0 || opts.silence_frac < 0 || opts.unknown_frac + opts.silence_frac >= 1.0)
    throw Error(Errc::invalid_argument, "unknown and silence fractions must be >= 0 and sum below 1");
  Rng rng(mix_seed(epoch_seed, 0x5eed));
  std::vector<Example> plan;
  std::vector<int> unknown_pool;
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    const auto& e = m.entries[i];
    if (e.split != split) continue;
    if (m.unknown_label >= 0 && e.label == m.unknown_label) unknown_pool.push_back(static_cast<int>(i));
    else plan.push_back({static_cast<int>(i), e.label, 0});
  }
  if (m.unknown_label >= 0 || m.silence_label >= 0) {
    const double known = static_cast<double>(plan.size());
    const double total = known / (1.0 - opts.unknown_frac - opts.silence_frac);
    if (m.unknown_label >= 0) {
      const auto want = static_cast<std::size_t>(std::llround(total * opts.unknown_frac));
      for (std::size_t i = unknown_pool.size(); i > 1; --i)
        std::swap(unknown_pool[i - 1], unknown_pool[rng.below(i)]);
      for (std::size_t i = 0; i < std::min(want, unknown_pool.size()); ++i)
        plan.push_back({unknown_pool[i], m.unknown_label, 0});
    }
    if (m.silence_label >= 0) {
      const auto want = static_cast<std::size_t>(std::llround(total * opts.silence_frac));
      for (std::size_t i = 0; i < want; ++i) plan.push_back({-1, m.silence_label, rng.next_u64()});
    }
  }
  for (std::size_t i = plan.size(); i > 1; --i) std::swap(plan[i - 1], plan[rng.below(i)]);
  return plan;
}

template <typename T>
struct Batch {
  Tensor<T> features;  // [B, 1, n_mels, frames]
  std::vector<int> labels;
};

// Optional waveform hook applied before feature extraction, e.g. noise mixing.
// Receives the clip and its position in the plan.
using ClipTransform = std::function<AudioClip(const AudioClip&, std::size_t position)>;

// Materializes examples of a plan: audio, fixed length, log-Mel.
class ExampleLoader {
 public:
  explicit ExampleLoader(const DatasetManifest& manifest, bool cache_features = false)
      : manifest_(&manifest), cache_enabled_(cache_features) {}

  AudioClip clip(const Example& ex) const {
    if (ex.entry < 0) return sample_silence(background(), manifest_->target_samples, ex.silence_seed);
    return fix_length(load_wav(manifest_->entries.at(static_cast<std::size_t>(ex.entry)).path),
                      manifest_->target_samples);
  }

  FeatureMap features(const Example& ex, std::size_t position, const ClipTransform& transform) const {
    const bool cacheable = cache_enabled_ && ex.entry >= 0 && !transform;
    if (cacheable) {
      std::lock_guard<std::mutex> lock(mutex_);
      const auto it = cache_.find(ex.entry);
      if (it != cache_.end()) return it->second;
    }
    AudioClip audio = clip(ex);
    if (transform) audio = transform(audio, position);
    FeatureMap fm = log_mel(audio);
    if (cacheable) {
      std::lock_guard<std::mutex> lock(mutex_);
      cache_.emplace(ex.entry, fm);
    }
    return fm;
  }

  const DatasetManifest& manifest() const { return *manifest_; }

 private:
  const BackgroundPool& background() const {
    std::call_once(background_once_, [this] { background_ = BackgroundPool(manifest_->background_paths); });
    return background_;
  }

  const DatasetManifest* manifest_;
  bool cache_enabled_;
  mutable std::once_flag background_once_;
  mutable BackgroundPool background_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<int, FeatureMap> cache_;
};

// Deterministic batch sequence over a plan; the final short batch is kept.
template <typename T>
class BatchSequence {
 public:
  BatchSequence(const ExampleLoader& loader, std::vector<Example> plan, std::size_t batch_size,
                ClipTransform transform = {})
      : loader_(&loader), plan_(std::move(plan)), batch_size_(batch_size), transform_(std::move(transform)) {
    if (batch_size_ == 0) throw Error(Errc::invalid_argument, "batch size must be positive");
  }

  std::size_t size() const { return (plan_.size() + batch_size_ - 1) / batch_size_; }
  std::size_t num_examples() const { return plan_.size(); }
  const std::vector<Example>& plan() const { return plan_; }

  Batch<T> operator[](std::size_t index) const {
    const std::size_t begin = index * batch_size_;
    const std::size_t end = std::min(plan_.size(), begin + batch_size_);
    if (begin >= end) throw Error(Errc::invalid_argument, "batch index out of range");
    std::vector<FeatureMap> maps(end - begin);
    parallel_for(maps.size(), [&](std::size_t i) { maps[i] = loader_->features(plan_[begin + i], begin + i, transform_); });
    Batch<T> b;
    b.features = stack_features<T>(maps);
    for (std::size_t i = begin; i < end; ++i) b.labels.push_back(plan_[i].label);
    return b;
  }

 private:
  const ExampleLoader* loader_;
  std::vector<Example> plan_;
  std::size_t batch_size_;
  ClipTransform transform_;
};

template <typename T = float>
BatchSequence<T> batches(const ExampleLoader& loader, Split split, std::size_t batch_size, std::uint64_t epoch_seed,
                         const PlanOptions& opts = {}) {
  return BatchSequence<T>(loader, plan_epoch(loader.manifest(), split, epoch_seed, opts), batch_size);
}

}  // namespace bcse

#endif  // BCSE_BATCHES_HPP_
