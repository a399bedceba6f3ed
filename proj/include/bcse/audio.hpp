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

#ifndef BCSE_AUDIO_HPP_
#define BCSE_AUDIO_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "bcse/error.hpp"

namespace bcse {

inline constexpr std::uint32_t kSampleRate = 16000;

struct AudioClip {
  std::vector<float> samples;
  std::uint32_t sample_rate = kSampleRate;

  std::size_t size() const { return samples.size(); }
};

inline void validate_clip(const AudioClip& clip) {
  if (clip.sample_rate != kSampleRate)
    throw Error(Errc::format, "sample_rate=" + std::to_string(clip.sample_rate) + ", expected 16000");
  for (float s : clip.samples)
    if (!std::isfinite(s)) throw Error(Errc::format, "non-finite sample");
}

namespace detail {

inline std::uint32_t read_le32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}
inline std::uint16_t read_le16(const unsigned char* p) { return std::uint16_t(p[0] | p[1] << 8); }

inline void put_le32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
inline void put_le16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace detail

// Parses an in-memory RIFF/WAVE image. Only PCM16 mono 16 kHz is accepted.
inline AudioClip parse_wav(const std::vector<unsigned char>& bytes, const std::string& what = "wav") {
  if (bytes.size() < 12) throw Error(Errc::parse, what + ": truncated RIFF header");
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw Error(Errc::format, what + ": not a RIFF/WAVE file");
  std::size_t pos = 12;
  bool have_fmt = false;
  AudioClip clip;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    const std::uint32_t size = detail::read_le32(hdr + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) throw Error(Errc::parse, what + ": truncated fmt chunk");
      const unsigned char* f = bytes.data() + body;
      const std::uint16_t format = detail::read_le16(f);
      const std::uint16_t channels = detail::read_le16(f + 2);
      const std::uint32_t rate = detail::read_le32(f + 4);
      const std::uint16_t bits = detail::read_le16(f + 14);
      if (format != 1) throw Error(Errc::format, what + ": audio_format=" + std::to_string(format) + ", expected 1 (PCM)");
      if (channels != 1) throw Error(Errc::format, what + ": channels=" + std::to_string(channels) + ", expected 1");
      if (rate != kSampleRate)
        throw Error(Errc::format, what + ": sample_rate=" + std::to_string(rate) + ", expected 16000");
      if (bits != 16) throw Error(Errc::format, what + ": bits_per_sample=" + std::to_string(bits) + ", expected 16");
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (!have_fmt) throw Error(Errc::parse, what + ": data chunk before fmt chunk");
      if (body + size > bytes.size()) throw Error(Errc::parse, what + ": truncated data chunk");
      if (size % 2 != 0) throw Error(Errc::parse, what + ": odd data chunk size for PCM16");
      clip.samples.resize(size / 2);
      for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        const auto raw = static_cast<std::int16_t>(detail::read_le16(bytes.data() + body + 2 * i));
        clip.samples[i] = static_cast<float>(raw) / 32768.0f;
      }
      return clip;
    }
    pos = body + size + (size & 1);
  }
  throw Error(Errc::parse, what + (have_fmt ? ": missing data chunk" : ": missing fmt chunk"));
}

inline AudioClip load_wav(const std::filesystem::path& path) {
  return parse_wav(detail::read_file(path), path.string());
}

inline std::vector<unsigned char> encode_wav(const AudioClip& clip) {
  std::vector<unsigned char> out;
  const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  detail::put_le32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  detail::put_le32(out, 16);
  detail::put_le16(out, 1);
  detail::put_le16(out, 1);
  detail::put_le32(out, clip.sample_rate);
  detail::put_le32(out, clip.sample_rate * 2);
  detail::put_le16(out, 2);
  detail::put_le16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  detail::put_le32(out, data_bytes);
  for (float s : clip.samples) {
    const long q = std::lround(static_cast<double>(s) * 32768.0);
    detail::put_le16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L))));
  }
  return out;
}

inline void save_wav(const std::filesystem::path& path, const AudioClip& clip) {
  const auto bytes = encode_wav(clip);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

enum class CropPolicy { center, start };

// Zero-pads short clips at the end; crops long clips (centered by default).
inline AudioClip fix_length(const AudioClip& clip, std::size_t target_samples,
                            CropPolicy crop = CropPolicy::center) {
  if (target_samples < 1) throw Error(Errc::invalid_argument, "target_samples must be at least 1");
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  if (clip.size() <= target_samples) {
    out.samples = clip.samples;
    out.samples.resize(target_samples, 0.0f);
    return out;
  }
  const std::size_t offset = crop == CropPolicy::center ? (clip.size() - target_samples) / 2 : 0;
  out.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(offset),
                     clip.samples.begin() + static_cast<std::ptrdiff_t>(offset + target_samples));
  return out;
}

inline double mean_power(const AudioClip& clip) {
  if (clip.samples.empty()) return 0.0;
  double acc = 0.0;
  for (float s : clip.samples) acc += static_cast<double>(s) * s;
  return acc / static_cast<double>(clip.samples.size());
}

}  // namespace bcse

#endif  // BCSE_AUDIO_HPP_
