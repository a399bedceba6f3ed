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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "bcse/batches.hpp"
#include "bcse/noise.hpp"
#include "test_util.hpp"

namespace bcse {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::io;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "<no error>";
}

const ManifestEntry* find_entry(const DatasetManifest& m, const std::string& rel) {
  for (const auto& e : m.entries)
    if (e.rel == rel) return &e;
  return nullptr;
}

// ---- scan_gsc ---------------------------------------------------------------

TEST(ScanGsc, SplitsAndLabels) {
  TempDir dir("gsc");
  const auto [val, test] = testing::write_gsc_tree(dir.path());
  const auto m = scan_gsc(dir.path(), val, test);
  EXPECT_EQ(m.num_classes(), 12u);
  EXPECT_EQ(m.label_names[10], "unknown");
  EXPECT_EQ(m.label_names[11], "silence");
  EXPECT_EQ(m.unknown_label, 10);
  EXPECT_EQ(m.silence_label, 11);
  EXPECT_EQ(m.entries.size(), 12u * 3u);

  const auto* yes0 = find_entry(m, "yes/clip0.wav");
  ASSERT_NE(yes0, nullptr);
  EXPECT_EQ(yes0->split, Split::train);
  EXPECT_EQ(yes0->label, 0);
  EXPECT_EQ(find_entry(m, "yes/clip1.wav")->split, Split::val);
  EXPECT_EQ(find_entry(m, "no/clip2.wav")->split, Split::test);
  EXPECT_EQ(find_entry(m, "no/clip2.wav")->label, 1);
  EXPECT_EQ(find_entry(m, "go/clip0.wav")->label, 9);
  EXPECT_EQ(find_entry(m, "marvin/clip2.wav")->label, 10);
  EXPECT_EQ(find_entry(m, "marvin/clip0.wav")->split, Split::val);
  EXPECT_EQ(find_entry(m, "sheila/clip1.wav")->split, Split::test);
  for (const auto& e : m.entries) EXPECT_NE(e.label, 11) << "silence has no files";
  EXPECT_EQ(m.count(Split::val), 2u);
  EXPECT_EQ(m.count(Split::test), 2u);
  EXPECT_EQ(m.count(Split::train), 32u);
  ASSERT_EQ(m.background_paths.size(), 1u);
  EXPECT_EQ(m.background_paths[0].filename(), "hum.wav");
}

TEST(ScanGsc, LabelIdsBelowClassCount) {
  TempDir dir("gsc");
  const auto [val, test] = testing::write_gsc_tree(dir.path());
  const auto m = scan_gsc(dir.path(), val, test);
  std::set<std::string> seen;
  for (const auto& e : m.entries) {
    EXPECT_GE(e.label, 0);
    EXPECT_LT(static_cast<std::size_t>(e.label), m.num_classes());
    EXPECT_TRUE(seen.insert(e.path.string()).second) << "path listed twice: " << e.path;
  }
}

TEST(ScanGsc, RescanIsStable) {
  TempDir dir("gsc");
  const auto [val, test] = testing::write_gsc_tree(dir.path());
  const auto a = scan_gsc(dir.path(), val, test);
  const auto b = scan_gsc(dir.path(), val, test);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  EXPECT_EQ(a.label_names, b.label_names);
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    EXPECT_EQ(a.entries[i].path, b.entries[i].path);
    EXPECT_EQ(a.entries[i].label, b.entries[i].label);
    EXPECT_EQ(a.entries[i].split, b.entries[i].split);
  }
}

TEST(ScanGsc, MissingKeywordFolder) {
  TempDir dir("gsc");
  const auto [val, test] = testing::write_gsc_tree(dir.path(), 1);
  fs::remove_all(dir / "left");
  const auto msg = message_of([&] { scan_gsc(dir.path(), val, test); });
  EXPECT_NE(msg.find("'left'"), std::string::npos) << msg;
  EXPECT_EQ(code_of([&] { scan_gsc(dir.path(), val, test); }), Errc::dataset_layout);
}

TEST(ScanGsc, FileInBothLists) {
  TempDir dir("gsc");
  const auto [val, test] = testing::write_gsc_tree(dir.path(), 1);
  testing::write_text(test, "yes/clip1.wav\n");
  EXPECT_EQ(code_of([&] { scan_gsc(dir.path(), val, test); }), Errc::split_conflict);
}

TEST(ScanGsc, MissingRootOrList) {
  TempDir dir("gsc");
  EXPECT_EQ(code_of([&] { scan_gsc(dir / "nope", {}, {}); }), Errc::dataset_layout);
  testing::write_gsc_tree(dir.path(), 1);
  EXPECT_EQ(code_of([&] { scan_gsc(dir.path(), dir / "missing.txt", {}); }), Errc::dataset_layout);
}

TEST(ScanGsc, KeywordsOnlyOption) {
  TempDir dir("gsc");
  const auto [val, test] = testing::write_gsc_tree(dir.path(), 2);
  GscOptions opts;
  opts.unknown_and_silence = false;
  const auto m = scan_gsc(dir.path(), val, test, {"yes", "no"}, opts);
  EXPECT_EQ(m.num_classes(), 2u);
  EXPECT_EQ(m.unknown_label, -1);
  EXPECT_EQ(m.silence_label, -1);
  EXPECT_EQ(m.entries.size(), 4u);
}

// ---- folder corpus ----------------------------------------------------------

std::vector<std::string> fifteen_commands() {
  std::vector<std::string> names;
  for (int i = 0; i < 15; ++i) names.push_back("cmd" + std::to_string(100 + i));
  return names;
}

TEST(FolderCorpus, FifteenClasses) {
  TempDir dir("ctc");
  const auto names = fifteen_commands();
  testing::write_tone_corpus(dir.path(), names, 4, 800);
  const auto m = scan_folder_corpus(dir.path(), names);
  EXPECT_EQ(m.num_classes(), 15u);
  EXPECT_EQ(m.target_samples, 17600u);
  std::set<int> labels;
  for (const auto& e : m.entries) {
    labels.insert(e.label);
    EXPECT_EQ(e.rel.substr(0, 6), names[static_cast<std::size_t>(e.label)]);
  }
  EXPECT_EQ(labels.size(), 15u);
  EXPECT_EQ(*labels.begin(), 0);
  EXPECT_EQ(*labels.rbegin(), 14);
  EXPECT_EQ(m.unknown_label, -1);
  EXPECT_EQ(m.silence_label, -1);
  EXPECT_TRUE(m.warnings.empty());
}

TEST(FolderCorpus, DeterministicRescan) {
  TempDir dir("ctc");
  const auto names = fifteen_commands();
  testing::write_tone_corpus(dir.path(), names, 3, 800);
  const auto a = scan_folder_corpus(dir.path(), names);
  const auto b = scan_folder_corpus(dir.path(), names);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    EXPECT_EQ(a.entries[i].rel, b.entries[i].rel);
    EXPECT_EQ(a.entries[i].split, b.entries[i].split);
  }
}

TEST(FolderCorpus, RenameKeepsLabel) {
  TempDir dir("ctc");
  testing::write_tone_corpus(dir.path(), {"a", "b"}, 1, 800);
  for (int i = 0; i < 40; ++i) {
    const std::string name = "renamed" + std::to_string(i) + ".wav";
    fs::rename(dir / "b" / (i == 0 ? "clip0.wav" : "renamed" + std::to_string(i - 1) + ".wav"), dir / "b" / name);
    const auto m = scan_folder_corpus(dir.path(), {"a", "b"});
    const auto* e = find_entry(m, "b/" + name);
    ASSERT_NE(e, nullptr);
    EXPECT_EQ(e->label, 1);
    EXPECT_EQ(e->split, name_hash_split(name));
  }
}

TEST(FolderCorpus, HashSplitProportions) {
  std::map<Split, int> counts;
  for (int i = 0; i < 20000; ++i) ++counts[name_hash_split("utt_" + std::to_string(i) + ".wav")];
  EXPECT_NEAR(counts[Split::train] / 20000.0, 0.8, 0.015);
  EXPECT_NEAR(counts[Split::val] / 20000.0, 0.1, 0.01);
  EXPECT_NEAR(counts[Split::test] / 20000.0, 0.1, 0.01);
}

TEST(FolderCorpus, EmptyFolderWarns) {
  TempDir dir("ctc");
  testing::write_tone_corpus(dir.path(), {"a", "b"}, 2, 800);
  fs::create_directories(dir / "c");
  const auto m = scan_folder_corpus(dir.path(), {"a", "b", "c"});
  ASSERT_EQ(m.warnings.size(), 1u);
  EXPECT_NE(m.warnings[0].find("'c'"), std::string::npos);
  EXPECT_EQ(m.entries.size(), 4u);
}

TEST(FolderCorpus, Errors) {
  TempDir dir("ctc");
  testing::write_tone_corpus(dir.path(), {"a", "b"}, 1, 800);
  EXPECT_EQ(code_of([&] { scan_folder_corpus(dir.path(), {"a", "zz"}); }), Errc::dataset_layout);
  EXPECT_EQ(code_of([&] { scan_folder_corpus(dir.path(), {"a"}); }), Errc::dataset_layout);
  testing::write_background(dir.path());
  EXPECT_EQ(list_class_folders(dir.path()), (std::vector<std::string>{"a", "b"}));
}

// ---- silence ----------------------------------------------------------------

TEST(Silence, DeterministicAndExactLength) {
  TempDir dir("sil");
  testing::write_background(dir.path(), 20000);
  const std::vector<fs::path> bg{dir / kBackgroundDir / "hum.wav"};
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    const auto a = sample_silence(bg, 16000, seed);
    const auto b = sample_silence(bg, 16000, seed);
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_EQ(a.size(), 16000u);
  }
  EXPECT_NE(sample_silence(bg, 16000, 1).samples, sample_silence(bg, 16000, 2).samples);
}

// A crop is a scaled contiguous run of the recording.
TEST(Silence, ContiguousScaledCrop) {
  const std::size_t n = 3000, target = 1000;
  AudioClip ramp;
  for (std::size_t i = 0; i < n; ++i) ramp.samples.push_back(static_cast<float>(0.1 + 0.8 * i / n));
  TempDir dir("sil");
  save_wav(dir / "ramp.wav", ramp);
  const BackgroundPool pool({dir / "ramp.wav"});
  const auto& src = pool.clips()[0].samples;
  std::set<std::size_t> offsets;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto c = sample_silence(pool, target, seed);
    if (c.samples[0] == 0.0f) continue;
    std::size_t best = 0;
    double best_err = 1e9;
    for (std::size_t off = 0; off + target <= n; ++off) {
      const double g = c.samples[0] / src[off];
      if (g < 0 || g > 1.0 + 1e-6) continue;
      double err = 0;
      for (std::size_t i = 0; i < target; i += 97) err = std::max(err, std::abs(c.samples[i] - g * src[off + i]));
      if (err < best_err) best_err = err, best = off;
    }
    EXPECT_LT(best_err, 1e-5) << seed;
    offsets.insert(best);
  }
  EXPECT_GT(offsets.size(), 150u);
  EXPECT_LE(*offsets.rbegin(), n - target);
}

TEST(Silence, ZeroGainClipIsLegal) {
  TempDir dir("sil");
  AudioClip zero;
  zero.samples.assign(18000, 0.0f);
  save_wav(dir / "zero.wav", zero);
  const auto c = sample_silence({dir / "zero.wav"}, 16000, 4);
  EXPECT_TRUE(std::all_of(c.samples.begin(), c.samples.end(), [](float v) { return v == 0.0f; }));
  EXPECT_NO_THROW(validate_clip(c));
  const auto fm = log_mel(c);
  EXPECT_NEAR(fm.at(0, 0), std::log(1e-6), 1e-4);
}

TEST(Silence, GainWithinUnitInterval) {
  TempDir dir("sil");
  AudioClip flat;
  flat.samples.assign(17000, 0.5f);
  save_wav(dir / "flat.wav", flat);
  const BackgroundPool pool({dir / "flat.wav"});
  double lo = 1, hi = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto c = sample_silence(pool, 16000, seed);
    const double g = c.samples[0] / 0.5;
    for (float v : c.samples) ASSERT_EQ(v, c.samples[0]);
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  }
  EXPECT_GE(lo, 0.0);
  EXPECT_LE(hi, 1.0);
  EXPECT_LT(lo, 0.02);
  EXPECT_GT(hi, 0.98);
}

TEST(Silence, Unavailable) {
  TempDir dir("sil");
  testing::write_background(dir.path(), 8000);
  EXPECT_EQ(code_of([&] { sample_silence({dir / kBackgroundDir / "hum.wav"}, 16000, 1); }),
            Errc::silence_unavailable);
  EXPECT_EQ(code_of([&] { sample_silence(std::vector<fs::path>{}, 16000, 1); }), Errc::silence_unavailable);
}

// ---- colored noise ----------------------------------------------------------

// Spectral slope in dB per octave from periodograms averaged over
// independent realizations, pooled into octave bands. For a power law the
// octave band means follow the same slope as the density itself.
double octave_slope_db(double alpha) {
  const std::size_t n = 8192, realizations = 48;
  std::vector<double> psd(n / 2, 0.0);
  for (std::size_t r = 0; r < realizations; ++r) {
    const auto x = colored_noise(n, alpha, 1000 + r);
    std::vector<Complex> v(x.samples.begin(), x.samples.end());
    dft(v, false);
    for (std::size_t k = 1; k < n / 2; ++k) psd[k] += std::norm(v[k]);
  }
  std::vector<double> xs, ys;
  for (std::size_t j = 2; (std::size_t{2} << j) <= n / 2; ++j) {
    double acc = 0;
    for (std::size_t k = std::size_t{1} << j; k < (std::size_t{2} << j); ++k) acc += psd[k];
    xs.push_back(static_cast<double>(j));
    ys.push_back(10.0 * std::log10(acc / static_cast<double>(std::size_t{1} << j)));
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

TEST(ColoredNoise, WhiteIsFlat) { EXPECT_NEAR(octave_slope_db(0.0), 0.0, 0.3); }

TEST(ColoredNoise, BrownFallsSixDbPerOctave) { EXPECT_NEAR(octave_slope_db(2.0), -6.0, 1.0); }

TEST(ColoredNoise, PinkFallsThreeDbPerOctave) { EXPECT_NEAR(octave_slope_db(1.0), -3.0, 0.5); }

TEST(ColoredNoise, UnitPowerAndZeroMean) {
  for (NoiseKind kind : {NoiseKind::white, NoiseKind::pink, NoiseKind::brown}) {
    for (std::size_t n : {2u, 101u, 16000u}) {
      const auto x = colored_noise(n, kind, 5);
      EXPECT_NEAR(mean_power(x), 1.0, 1e-6);
      double mean = 0;
      for (float v : x.samples) mean += v;
      mean /= static_cast<double>(n);
      EXPECT_LT(std::abs(mean), 3.0 / std::sqrt(static_cast<double>(n)));
      for (float v : x.samples) ASSERT_TRUE(std::isfinite(v));
    }
  }
}

TEST(ColoredNoise, SeededAndValidated) {
  EXPECT_EQ(colored_noise(512, 1.0, 3).samples, colored_noise(512, 1.0, 3).samples);
  EXPECT_NE(colored_noise(512, 1.0, 3).samples, colored_noise(512, 1.0, 4).samples);
  EXPECT_EQ(code_of([] { colored_noise(1, 1.0, 0); }), Errc::invalid_argument);
  EXPECT_EQ(code_of([] { colored_noise(64, 2.5, 0); }), Errc::invalid_argument);
  EXPECT_EQ(code_of([] { colored_noise(64, -0.1, 0); }), Errc::invalid_argument);
  EXPECT_EQ(spectral_exponent(parse_noise_kind("brown")), 2.0);
  EXPECT_EQ(code_of([] { parse_noise_kind("violet"); }), Errc::invalid_argument);
}

// ---- mixing -----------------------------------------------------------------

TEST(MixAtSnr, EqualPowerAtZeroDb) {
  AudioClip clip, noise;
  for (int i = 0; i < 1000; ++i) {
    clip.samples.push_back(i % 2 ? 0.5f : -0.5f);
    noise.samples.push_back(i % 3 ? 0.5f : -0.5f);
  }
  EXPECT_DOUBLE_EQ(snr_noise_scale(clip, noise, 0.0), 1.0);
  const auto mixed = mix_at_snr(clip, noise, 0.0);
  for (int i = 0; i < 1000; ++i) EXPECT_FLOAT_EQ(mixed.samples[i], clip.samples[i] + noise.samples[i]);
}

TEST(MixAtSnr, TenDbIsOneTenthPower) {
  const auto clip = testing::random_clip(4000, 1);
  const auto noise = colored_noise(4000, NoiseKind::pink, 2);
  const double scale = snr_noise_scale(clip, noise, 10.0);
  EXPECT_NEAR(scale * scale * mean_power(noise), mean_power(clip) / 10.0, 1e-12);
}

TEST(MixAtSnr, MeasuredSnrMatches) {
  for (double snr : {-10.0, -3.0, 0.0, 10.0, 25.0}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto clip = testing::tone_example(seed, 16000, seed);
      const auto noise = colored_noise(16000, NoiseKind::brown, seed + 10);
      const auto mixed = mix_at_snr(clip, noise, snr);
      AudioClip added;
      for (std::size_t i = 0; i < clip.size(); ++i)
        added.samples.push_back(static_cast<float>(static_cast<double>(mixed.samples[i]) - clip.samples[i]));
      EXPECT_NEAR(10.0 * std::log10(mean_power(clip) / mean_power(added)), snr, 0.01);
    }
  }
}

TEST(MixAtSnr, NoClipping) {
  const auto clip = testing::sine(440, 1000, 0.9);
  const auto mixed = mix_at_snr(clip, colored_noise(1000, NoiseKind::white, 1), -10.0);
  EXPECT_GT(*std::max_element(mixed.samples.begin(), mixed.samples.end()), 1.0f);
}

TEST(MixAtSnr, Errors) {
  AudioClip zero;
  zero.samples.assign(100, 0.0f);
  const auto noise = colored_noise(100, NoiseKind::white, 1);
  EXPECT_EQ(code_of([&] { mix_at_snr(zero, noise, 0.0); }), Errc::undefined_snr);
  EXPECT_EQ(code_of([&] { mix_at_snr(noise, zero, 0.0); }), Errc::undefined_snr);
  EXPECT_EQ(code_of([&] { mix_at_snr(noise, colored_noise(99, NoiseKind::white, 1), 0.0); }), Errc::shape_mismatch);
}

// ---- batches ----------------------------------------------------------------

TEST(Batches, PermutationWithoutUnknownOrSilence) {
  TempDir dir("bat");
  testing::write_tone_corpus(dir.path(), {"a", "b", "c"}, 30, 800);
  const auto m = scan_folder_corpus(dir.path(), {"a", "b", "c"});
  const PlanOptions none{0.0, 0.0};
  for (Split split : {Split::train, Split::val, Split::test}) {
    const auto plan = plan_epoch(m, split, 4, none);
    std::multiset<int> got, want;
    for (const auto& ex : plan) {
      got.insert(ex.entry);
      EXPECT_EQ(ex.label, m.entries[static_cast<std::size_t>(ex.entry)].label);
    }
    for (std::size_t i = 0; i < m.entries.size(); ++i)
      if (m.entries[i].split == split) want.insert(static_cast<int>(i));
    EXPECT_EQ(got, want);
  }
  const auto a = plan_epoch(m, Split::train, 4, none), b = plan_epoch(m, Split::train, 5, none);
  bool differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) differ = differ || a[i].entry != b[i].entry;
  EXPECT_TRUE(differ);
}

TEST(Batches, DeterministicSequenceAndConservation) {
  TempDir dir("bat");
  testing::write_tone_corpus(dir.path(), {"a", "b"}, 12, 800);
  const auto m = scan_folder_corpus(dir.path(), {"a", "b"}, 4000);
  const ExampleLoader loader(m);
  const auto s1 = batches(loader, Split::train, 7, 11, {0.0, 0.0});
  const auto s2 = batches(loader, Split::train, 7, 11, {0.0, 0.0});
  ASSERT_EQ(s1.size(), s2.size());
  std::size_t total = 0;
  for (std::size_t i = 0; i < s1.size(); ++i) {
    const auto b1 = s1[i], b2 = s2[i];
    EXPECT_EQ(b1.labels, b2.labels);
    EXPECT_EQ(std::vector<float>(b1.features.data().begin(), b1.features.data().end()),
              std::vector<float>(b2.features.data().begin(), b2.features.data().end()));
    EXPECT_EQ(b1.features.shape(), (Shape{b1.labels.size(), 1, 40, 23}));
    total += b1.labels.size();
  }
  EXPECT_EQ(total, s1.num_examples());
  EXPECT_EQ(total, m.count(Split::train));
  EXPECT_LT(s1[s1.size() - 1].labels.size(), 7u + 1);
  EXPECT_EQ(code_of([&] { s1[s1.size()]; }), Errc::invalid_argument);
}

TEST(Batches, UnknownAndSilenceFractions) {
  TempDir dir("bat");
  testing::write_tone_corpus(dir.path(), {"marvin", "sheila", "wow"}, 60, 200);
  testing::write_tone_corpus(dir.path(), gsc_keywords(), 16, 200);
  testing::write_background(dir.path());
  const auto m = scan_gsc(dir.path(), {}, {});
  const auto plan = plan_epoch(m, Split::train, 1);
  std::size_t unknown = 0, silence = 0;
  std::set<std::uint64_t> seeds;
  for (const auto& ex : plan) {
    if (ex.label == m.unknown_label) ++unknown;
    if (ex.label == m.silence_label) {
      ++silence;
      EXPECT_EQ(ex.entry, -1);
      seeds.insert(ex.silence_seed);
    }
  }
  // 160 keyword files are 80% of 200
  EXPECT_EQ(plan.size(), 200u);
  EXPECT_EQ(unknown, 20u);
  EXPECT_EQ(silence, 20u);
  EXPECT_EQ(seeds.size(), 20u);
  const auto other = plan_epoch(m, Split::train, 2);
  std::set<int> u1, u2;
  for (const auto& ex : plan)
    if (ex.label == m.unknown_label) u1.insert(ex.entry);
  for (const auto& ex : other)
    if (ex.label == m.unknown_label) u2.insert(ex.entry);
  EXPECT_NE(u1, u2) << "unknown subsample is redrawn each epoch";

  const ExampleLoader loader(m);
  for (const auto& ex : plan) {
    if (ex.entry >= 0) continue;
    EXPECT_EQ(loader.clip(ex).size(), 16000u);
    break;
  }
  EXPECT_EQ(code_of([&] { plan_epoch(m, Split::train, 1, {0.5, 0.5}); }), Errc::invalid_argument);
}

TEST(Batches, CachedFeaturesMatchFresh) {
  TempDir dir("bat");
  testing::write_tone_corpus(dir.path(), {"a", "b"}, 5, 900);
  const auto m = scan_folder_corpus(dir.path(), {"a", "b"}, 4000);
  const ExampleLoader cached(m, true), fresh(m, false);
  for (int pass = 0; pass < 2; ++pass) {
    const auto b1 = batches(cached, Split::train, 3, 8, {0, 0})[0];
    const auto b2 = batches(fresh, Split::train, 3, 8, {0, 0})[0];
    EXPECT_EQ(std::vector<float>(b1.features.data().begin(), b1.features.data().end()),
              std::vector<float>(b2.features.data().begin(), b2.features.data().end()));
  }
}

TEST(Batches, ZeroBatchSizeRejected) {
  DatasetManifest m;
  const ExampleLoader loader(m);
  EXPECT_EQ(code_of([&] { BatchSequence<float>(loader, {}, 0); }), Errc::invalid_argument);
}

}  // namespace
}  // namespace bcse
