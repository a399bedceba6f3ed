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

// Log-Mel front end: 30 ms Hann frames every 10 ms, 512-point power
// spectrum, 40 HTK-mel triangles, natural log with a 1e-6 floor.

#ifndef BCSE_FEATURES_HPP_
#define BCSE_FEATURES_HPP_

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "bcse/audio.hpp"
#include "bcse/fft.hpp"
#include "bcse/tensor.hpp"

namespace bcse {

inline constexpr std::size_t kNumMels = 40;
inline constexpr std::size_t kWindowSamples = 480;
inline constexpr std::size_t kHopSamples = 160;
inline constexpr std::size_t kFftSize = 512;
inline constexpr double kLogFloor = 1e-6;

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

inline std::size_t num_frames(std::size_t num_samples) {
  if (num_samples < kWindowSamples) return 0;
  return 1 + (num_samples - kWindowSamples) / kHopSamples;
}

// Samples needed to produce exactly `frames` frames.
inline std::size_t samples_for_frames(std::size_t frames) {
  return frames == 0 ? 0 : (frames - 1) * kHopSamples + kWindowSamples;
}

struct MelFilterbank {
  std::size_t n_mels = 0;
  std::size_t n_bins = 0;  // n_fft / 2 + 1
  double fmin = 0.0;
  double fmax = 0.0;
  std::vector<double> weights;       // [n_mels, n_bins]
  std::vector<double> center_hz;     // n_mels

  double weight(std::size_t mel, std::size_t bin) const { return weights[mel * n_bins + bin]; }
};

inline MelFilterbank mel_filterbank(std::size_t n_mels = kNumMels, std::size_t n_fft = kFftSize,
                                    double sample_rate = kSampleRate, double fmin = 20.0, double fmax = 8000.0) {
  if (n_mels < 1 || n_fft < 2) throw Error(Errc::invalid_argument, "mel filterbank needs n_mels >= 1 and n_fft >= 2");
  if (!(fmin >= 0.0 && fmin < fmax)) throw Error(Errc::invalid_argument, "mel filterbank needs 0 <= fmin < fmax");
  if (fmax > sample_rate / 2.0) throw Error(Errc::invalid_argument, "fmax above Nyquist");
  MelFilterbank fb;
  fb.n_mels = n_mels;
  fb.n_bins = n_fft / 2 + 1;
  fb.fmin = fmin;
  fb.fmax = fmax;
  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(n_mels + 1));
  fb.weights.assign(n_mels * fb.n_bins, 0.0);
  fb.center_hz.resize(n_mels);
  const double bin_hz = sample_rate / static_cast<double>(n_fft);
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    fb.center_hz[m] = mid;
    for (std::size_t k = 0; k < fb.n_bins; ++k) {
      const double f = bin_hz * static_cast<double>(k);
      double w = 0.0;
      if (f > lo && f <= mid) w = (f - lo) / (mid - lo);
      else if (f > mid && f < hi) w = (hi - f) / (hi - mid);
      fb.weights[m * fb.n_bins + k] = w;
    }
  }
  return fb;
}

// Row-major [1, n_mels, frames]; frequency index varies slowest.
struct FeatureMap {
  std::size_t n_mels = kNumMels;
  std::size_t frames = 0;
  std::vector<float> values;

  float at(std::size_t mel, std::size_t frame) const { return values[mel * frames + frame]; }
  Shape shape() const { return {1, n_mels, frames}; }

  template <typename T>
  Tensor<T> to_tensor() const {
    return Tensor<T>({1, 1, n_mels, frames}, std::vector<T>(values.begin(), values.end()));
  }
};

inline const std::vector<double>& hann_window() {
  static const std::vector<double> window = [] {
    std::vector<double> w(kWindowSamples);
    for (std::size_t n = 0; n < w.size(); ++n)
      w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(kWindowSamples));
    return w;
  }();
  return window;
}

inline const MelFilterbank& default_filterbank() {
  static const MelFilterbank fb = mel_filterbank();
  return fb;
}

inline FeatureMap log_mel(const AudioClip& clip, const MelFilterbank& fb = default_filterbank()) {
  if (clip.size() < kWindowSamples)
    throw Error(Errc::too_short, "clip has " + std::to_string(clip.size()) + " samples, needs at least 480");
  if (fb.n_bins != kFftSize / 2 + 1) throw Error(Errc::invalid_argument, "filterbank was not built for n_fft=512");
  const std::size_t frames = num_frames(clip.size());
  FeatureMap out;
  out.n_mels = fb.n_mels;
  out.frames = frames;
  out.values.resize(fb.n_mels * frames);
  const auto& window = hann_window();
  std::vector<Complex> buf(kFftSize);
  std::vector<double> power(fb.n_bins);
  for (std::size_t t = 0; t < frames; ++t) {
    const float* src = clip.samples.data() + t * kHopSamples;
    for (std::size_t n = 0; n < kFftSize; ++n)
      buf[n] = n < kWindowSamples ? Complex(window[n] * src[n], 0.0) : Complex(0.0, 0.0);
    fft_pow2(buf);
    for (std::size_t k = 0; k < fb.n_bins; ++k) power[k] = std::norm(buf[k]);
    for (std::size_t m = 0; m < fb.n_mels; ++m) {
      double e = 0.0;
      const double* w = fb.weights.data() + m * fb.n_bins;
      for (std::size_t k = 0; k < fb.n_bins; ++k) e += w[k] * power[k];
      out.values[m * frames + t] = static_cast<float>(std::log(e + kLogFloor));
    }
  }
  return out;
}

// Stacks equally sized feature maps into [N, 1, n_mels, frames].
template <typename T>
Tensor<T> stack_features(std::span<const FeatureMap> maps) {
  if (maps.empty()) throw Error(Errc::invalid_argument, "cannot stack zero feature maps");
  const std::size_t mels = maps[0].n_mels, frames = maps[0].frames;
  std::vector<T> data;
  data.reserve(maps.size() * mels * frames);
  for (const auto& m : maps) {
    if (m.n_mels != mels || m.frames != frames)
      throw Error(Errc::shape_mismatch, "feature maps of different sizes in one batch");
    data.insert(data.end(), m.values.begin(), m.values.end());
  }
  return Tensor<T>({maps.size(), 1, mels, frames}, std::move(data));
}

}  // namespace bcse

#endif  // BCSE_FEATURES_HPP_
