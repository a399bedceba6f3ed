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

#ifndef BCSE_DATASET_HPP_
#define BCSE_DATASET_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "bcse/audio.hpp"
#include "bcse/random.hpp"

namespace bcse {

namespace fs = std::filesystem;

enum class Split { train, val, test };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

struct ManifestEntry {
  fs::path path;
  std::string rel;  // "<folder>/<file>", the key used by split lists
  int label = 0;
  Split split = Split::train;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::vector<std::string> label_names;  // index is the label id
  std::vector<fs::path> background_paths;
  std::size_t target_samples = 16000;
  int unknown_label = -1;  // GSC layout only
  int silence_label = -1;  // GSC layout only; silence has no file entries
  std::vector<std::string> warnings;

  std::size_t num_classes() const { return label_names.size(); }

  int label_id(const std::string& name) const {
    const auto it = std::find(label_names.begin(), label_names.end(), name);
    return it == label_names.end() ? -1 : static_cast<int>(it - label_names.begin());
  }

  std::size_t count(Split s) const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [s](const ManifestEntry& e) { return e.split == s; }));
  }
};

inline const std::vector<std::string>& gsc_keywords() {
  static const std::vector<std::string> words{"yes", "no", "up", "down", "left", "right", "on", "off", "stop", "go"};
  return words;
}

inline constexpr const char* kBackgroundDir = "_background_noise_";

namespace detail {

inline std::vector<fs::path> sorted_wavs(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

inline std::set<std::string> read_list(const fs::path& path) {
  std::set<std::string> out;
  if (path.empty()) return out;
  std::ifstream in(path);
  if (!in) throw Error(Errc::dataset_layout, "cannot read split list " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
    if (!line.empty()) out.insert(line);
  }
  return out;
}

}  // namespace detail

struct GscOptions {
  // false: only the keyword folders, labelled 0..K-1, no unknown or silence.
  bool unknown_and_silence = true;
  std::string background_dir = kBackgroundDir;
  std::size_t target_samples = 16000;
};

// Speech Commands layout: one folder per word, a background-noise folder and
// validation/testing list files of "<word>/<file>.wav" lines.
inline DatasetManifest scan_gsc(const fs::path& root, const fs::path& val_list, const fs::path& test_list,
                                const std::vector<std::string>& keywords = gsc_keywords(),
                                const GscOptions& options = {}) {
  if (!fs::is_directory(root)) throw Error(Errc::dataset_layout, "dataset root " + root.string() + " is not a directory");
  const auto val = detail::read_list(val_list);
  const auto test = detail::read_list(test_list);
  for (const auto& rel : val)
    if (test.contains(rel)) throw Error(Errc::split_conflict, rel + " is listed for both validation and test");

  DatasetManifest m;
  m.target_samples = options.target_samples;
  m.label_names = keywords;
  for (const auto& word : keywords)
    if (!fs::is_directory(root / word)) throw Error(Errc::dataset_layout, "missing keyword folder '" + word + "'");
  std::vector<std::string> folders = keywords;
  if (options.unknown_and_silence) {
    m.unknown_label = static_cast<int>(m.label_names.size());
    m.label_names.push_back("unknown");
    m.silence_label = static_cast<int>(m.label_names.size());
    m.label_names.push_back("silence");
    std::vector<std::string> others;
    for (const auto& e : fs::directory_iterator(root)) {
      const std::string name = e.path().filename().string();
      if (!e.is_directory() || name.empty() || name[0] == '_' || name[0] == '.') continue;
      if (std::find(keywords.begin(), keywords.end(), name) == keywords.end()) others.push_back(name);
    }
    std::sort(others.begin(), others.end());
    folders.insert(folders.end(), others.begin(), others.end());
  }
  for (const auto& folder : folders) {
    const int id = m.label_id(folder);
    const int label = id >= 0 ? id : m.unknown_label;
    for (const auto& file : detail::sorted_wavs(root / folder)) {
      ManifestEntry e;
      e.path = file;
      e.rel = folder + "/" + file.filename().string();
      e.label = label;
      e.split = val.contains(e.rel) ? Split::val : test.contains(e.rel) ? Split::test : Split::train;
      m.entries.push_back(std::move(e));
    }
  }
  if (fs::is_directory(root / options.background_dir)) m.background_paths = detail::sorted_wavs(root / options.background_dir);
  return m;
}

// Split bucket from a hash of the file name: 80/10/10.
inline Split name_hash_split(const std::string& file_name) {
  const std::uint64_t bucket = fnv1a(file_name) % 100;
  return bucket < 80 ? Split::train : bucket < 90 ? Split::val : Split::test;
}

// Generic one-folder-per-class corpus; label ids follow `class_names`.
inline DatasetManifest scan_folder_corpus(const fs::path& root, const std::vector<std::string>& class_names,
                                          std::size_t target_samples = 17600,
                                          const std::string& background_dir = kBackgroundDir) {
  if (!fs::is_directory(root)) throw Error(Errc::dataset_layout, "dataset root " + root.string() + " is not a directory");
  if (class_names.size() < 2) throw Error(Errc::dataset_layout, "need at least two classes");
  DatasetManifest m;
  m.target_samples = target_samples;
  m.label_names = class_names;
  for (std::size_t id = 0; id < class_names.size(); ++id) {
    const fs::path dir = root / class_names[id];
    if (!fs::is_directory(dir)) throw Error(Errc::dataset_layout, "missing class folder '" + class_names[id] + "'");
    const auto files = detail::sorted_wavs(dir);
    if (files.empty()) m.warnings.push_back("class folder '" + class_names[id] + "' is empty");
    for (const auto& file : files) {
      ManifestEntry e;
      e.path = file;
      e.rel = class_names[id] + "/" + file.filename().string();
      e.label = static_cast<int>(id);
      e.split = name_hash_split(file.filename().string());
      m.entries.push_back(std::move(e));
    }
  }
  if (fs::is_directory(root / background_dir)) m.background_paths = detail::sorted_wavs(root / background_dir);
  return m;
}

// Class folders of a corpus root, sorted, skipping '_' and '.' prefixed ones.
inline std::vector<std::string> list_class_folders(const fs::path& root) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(root)) {
    const std::string name = e.path().filename().string();
    if (e.is_directory() && !name.empty() && name[0] != '_' && name[0] != '.') out.push_back(name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Background recordings loaded once for silence sampling.
class BackgroundPool {
 public:
  BackgroundPool() = default;
  explicit BackgroundPool(const std::vector<fs::path>& paths) {
    for (const auto& p : paths) clips_.push_back(load_wav(p));
  }

  const std::vector<AudioClip>& clips() const { return clips_; }

 private:
  std::vector<AudioClip> clips_;
};

// Random contiguous crop of a background recording scaled by U[0, 1].
inline AudioClip sample_silence(const BackgroundPool& pool, std::size_t target_samples, std::uint64_t seed) {
  std::vector<const AudioClip*> usable;
  for (const auto& c : pool.clips())
    if (c.size() >= target_samples) usable.push_back(&c);
  if (usable.empty())
    throw Error(Errc::silence_unavailable, "no background recording with at least " + std::to_string(target_samples) +
                                               " samples");
  Rng rng(seed);
  const AudioClip& src = *usable[rng.below(usable.size())];
  const std::size_t offset = static_cast<std::size_t>(rng.below(src.size() - target_samples + 1));
  const double gain = rng.uniform();
  AudioClip out;
  out.samples.resize(target_samples);
  for (std::size_t i = 0; i < target_samples; ++i)
    out.samples[i] = static_cast<float>(gain * src.samples[offset + i]);
  return out;
}

inline AudioClip sample_silence(const std::vector<fs::path>& background_paths, std::size_t target_samples,
                                std::uint64_t seed) {
  return sample_silence(BackgroundPool(background_paths), target_samples, seed);
}

}  // namespace bcse

#endif  // BCSE_DATASET_HPP_
