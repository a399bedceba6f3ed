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

#ifndef BCSE_NOISE_HPP_
#define BCSE_NOISE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bcse/audio.hpp"
#include "bcse/fft.hpp"
#include "bcse/random.hpp"

namespace bcse {

enum class NoiseKind { white, pink, brown };

inline double spectral_exponent(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::white: return 0.0;
    case NoiseKind::pink: return 1.0;
    case NoiseKind::brown: return 2.0;
  }
  return 0.0;
}

inline NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "white") return NoiseKind::white;
  if (s == "pink") return NoiseKind::pink;
  if (s == "brown") return NoiseKind::brown;
  throw Error(Errc::invalid_argument, "noise kind '" + s + "' (expected white, pink or brown)");
}

struct NoiseSpec {
  NoiseKind kind = NoiseKind::pink;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
};

// Gaussian noise with power spectrum ~ 1/f^alpha: white spectrum shaped by
// f^(-alpha/2) in amplitude, DC removed, scaled to unit mean power.
inline AudioClip colored_noise(std::size_t n, double alpha, std::uint64_t seed) {
  if (n < 2) throw Error(Errc::invalid_argument, "colored noise needs at least 2 samples");
  if (!(alpha >= 0.0 && alpha <= 2.0)) throw Error(Errc::invalid_argument, "spectral exponent must be in [0, 2]");
  Rng rng(seed);
  std::vector<Complex> spec(n);
  for (auto& v : spec) v = Complex(rng.normal(), 0.0);
  dft(spec);
  spec[0] = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double f = static_cast<double>(std::min(k, n - k));
    spec[k] *= std::pow(f, -alpha / 2.0);
  }
  dft(spec, true);
  std::vector<double> x(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = spec[i].real();
    mean += x[i];
  }
  mean /= static_cast<double>(n);
  double power = 0.0;
  for (double& v : x) {
    v -= mean;  // rounding residue only; the DC bin is already zero
    power += v * v;
  }
  power /= static_cast<double>(n);
  const double scale = 1.0 / std::sqrt(power);
  AudioClip out;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.samples[i] = static_cast<float>(x[i] * scale);
  return out;
}

inline AudioClip colored_noise(std::size_t n, NoiseKind kind, std::uint64_t seed) {
  return colored_noise(n, spectral_exponent(kind), seed);
}

// Factor that brings `noise` to P_signal / 10^(snr/10).
inline double snr_noise_scale(const AudioClip& clip, const AudioClip& noise, double snr_db) {
  const double ps = mean_power(clip);
  const double pn = mean_power(noise);
  if (!(ps > 0.0)) throw Error(Errc::undefined_snr, "signal has zero power");
  if (!(pn > 0.0)) throw Error(Errc::undefined_snr, "noise has zero power");
  return std::sqrt(ps / (pn * std::pow(10.0, snr_db / 10.0)));
}

// clip + scaled noise; no clipping to [-1, 1].
inline AudioClip mix_at_snr(const AudioClip& clip, const AudioClip& noise, double snr_db) {
  if (clip.size() != noise.size())
    throw Error(Errc::shape_mismatch, "clip has " + std::to_string(clip.size()) + " samples, noise " +
                                          std::to_string(noise.size()));
  const double scale = snr_noise_scale(clip, noise, snr_db);
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.resize(clip.size());
  for (std::size_t i = 0; i < clip.size(); ++i)
    out.samples[i] = static_cast<float>(clip.samples[i] + scale * noise.samples[i]);
  return out;
}

}  // namespace bcse

#endif  // BCSE_NOISE_HPP_
