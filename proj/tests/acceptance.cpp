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

// Acceptance run: one PASS/FAIL/SKIP line per criterion, tolerances fixed
// below. `--only N` runs a single criterion; a skipped single criterion exits
// with kSkipCode so ctest reports it as skipped.
//
// Environment:
//   BCSE_GSC_ROOT       Speech Commands v1 root (criterion 6, desk-scale run)
//   BCSE_GSC_FULL_CKPT  checkpoint of a full 12-class run (criterion 10, optional)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "bcse/bcse.hpp"
#include "conv_oracle.hpp"
#include "test_util.hpp"

namespace bcse::acceptance {
namespace {

namespace fs = std::filesystem;

constexpr int kSkipCode = 77;

// Tolerances and budgets.
constexpr double kGradTol = 1e-4;
constexpr double kGradBudgetSec = 300;
constexpr std::size_t kConvCases = 50;
constexpr double kConvTol = 1e-5;
constexpr double kConvBudgetSec = 60;
constexpr double kPlainTol = 0.02;
constexpr double kAttentionTol = 0.15;
constexpr double kSqueezeTol = 1e-6;
constexpr std::size_t kOverfitSamples = 32;
constexpr std::size_t kOverfitSteps = 200;
constexpr double kOverfitAcc = 99.0;
constexpr double kOverfitBudgetSec = 180;
constexpr double kDeskValAcc = 90.0;
constexpr std::size_t kDeskEpochs = 20;
constexpr double kDeskBudgetSec = 1800;
constexpr double kScheduleTol = 1e-12;
constexpr double kSnrTolDb = 0.01;
constexpr double kFullScaleTarget = 96.0;

enum class Status { pass, fail, skip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::pass : Status::fail, std::move(detail)}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- 1 ----------------------------------------------------------------------

Outcome gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  std::string where;
  std::size_t n = 0;
  for (const auto& name : grad_check_components()) {
    const auto r = grad_check(name);
    ++n;
    if (!(r.max_rel_error <= worst)) {
      worst = r.max_rel_error;
      where = name + ":" + r.location;
    }
  }
  const double sec = seconds_since(t0);
  return verdict(worst < kGradTol && sec < kGradBudgetSec,
                 fmt("%zu components, max_rel_error=%.3e at %s (< %.0e), %.1f s (< %.0f s)", n, worst, where.c_str(),
                     kGradTol, sec, kGradBudgetSec));
}

// ---- 2 ----------------------------------------------------------------------

Outcome convolution_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  for (std::size_t k = 0; k < kConvCases; ++k) {
    const testing::ConvCase cc = testing::random_conv_case(k);
    const ConvSpec& s = cc.spec;
    const auto x = Tensor<float>::uniform({cc.n, s.in_channels, cc.f, cc.t}, -1, 1, mix_seed(k, 1));
    const auto w = Tensor<float>::uniform(s.weight_shape(), -1, 1, mix_seed(k, 2));
    const Tensor<float> b = cc.bias ? Tensor<float>::uniform({s.out_channels}, -1, 1, mix_seed(k, 3)) : Tensor<float>{};
    const auto y = conv2d(x, s, w, b);
    std::size_t fo = 0, to = 0;
    const auto want = testing::direct_conv(testing::to_double(x.data()), cc.n, cc.f, cc.t, s,
                                           testing::to_double(w.data()),
                                           cc.bias ? testing::to_double(b.data()) : std::vector<double>{}, fo, to);
    if (y.shape() != Shape{cc.n, s.out_channels, fo, to}) return verdict(false, fmt("case %zu: shape differs", k));
    for (std::size_t i = 0; i < want.size(); ++i) worst = std::max(worst, std::abs(y[i] - want[i]));
  }
  const double sec = seconds_since(t0);
  return verdict(worst < kConvTol && sec < kConvBudgetSec,
                 fmt("%zu geometries, max_abs_error=%.2e (< %.0e), %.2f s", kConvCases, worst, kConvTol, sec));
}

// ---- 3 ----------------------------------------------------------------------

Outcome parameter_audit() {
  const double taus[] = {1, 3, 6, 8};
  const double plain[] = {9.2e3, 54.2e3, 188e3, 321e3};
  const double attn[] = {10e3, 61e3, 218e3, 376e3};
  bool ok = true;
  std::ostringstream os;
  for (int i = 0; i < 4; ++i) {
    ModelConfig c;
    c.tau = taus[i];
    c.attention = AttentionMode::none;
    const double a = static_cast<double>(count_params(c));
    c.attention = AttentionMode::se_tfwse;
    const double b = static_cast<double>(count_params(c));
    const double ea = a / plain[i] - 1, eb = b / attn[i] - 1;
    ok = ok && std::abs(ea) <= kPlainTol && std::abs(eb) <= kAttentionTol;
    os << (i ? "; " : "") << "tau=" << taus[i] << ' ' << a << " (" << fmt("%+.1f%%", 100 * ea) << ") / " << b << " ("
       << fmt("%+.1f%%", 100 * eb) << ")";
  }
  return verdict(ok, os.str());
}

// ---- 4 ----------------------------------------------------------------------

Outcome layer_identities() {
  using Td = Tensor<double>;
  std::vector<std::string> failed;
  const std::size_t n = 2, c = 5, f = 6, t = 7;
  const auto x = Td::uniform({n, c, f, t}, -2, 2, 41);
  auto at = [&](std::size_t b, std::size_t ch, std::size_t fi, std::size_t ti) {
    return x[((b * c + ch) * f + fi) * t + ti];
  };

  double se_err = 0;
  const auto zs = se_squeeze(x);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t ch = 0; ch < c; ++ch) {
      double acc = 0;
      for (std::size_t fi = 0; fi < f; ++fi)
        for (std::size_t ti = 0; ti < t; ++ti) acc += at(b, ch, fi, ti);
      se_err = std::max(se_err, std::abs(zs[b * c + ch] - acc / (f * t)));
    }
  if (!(se_err < kSqueezeTol)) failed.push_back("channel squeeze");

  double tf_err = 0;
  const auto zt = tfwse_squeeze(x);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t fi = 0; fi < f; ++fi)
      for (std::size_t ti = 0; ti < t; ++ti) {
        double acc = 0;
        for (std::size_t ch = 0; ch < c; ++ch) acc += at(b, ch, fi, ti);
        tf_err = std::max(tf_err, std::abs(zt[(b * f + fi) * t + ti] - acc / c));
      }
  if (!(tf_err < kSqueezeTol)) failed.push_back("frequency squeeze");

  auto random_params = [](std::size_t width, std::size_t hidden, std::uint64_t seed) {
    SEParams<double> p(width, hidden);
    p.w1 = Td::uniform(p.w1.shape(), -3, 3, mix_seed(seed, 1));
    p.b1 = Td::uniform(p.b1.shape(), -3, 3, mix_seed(seed, 2));
    p.w2 = Td::uniform(p.w2.shape(), -3, 3, mix_seed(seed, 3));
    p.b2 = Td::uniform(p.b2.shape(), -3, 3, mix_seed(seed, 4));
    return p;
  };
  const Td gates[] = {se_gates(x, random_params(c, 4, 42)), tfwse_gates(x, random_params(f, 2, 43))};
  const Td zero_gates[] = {se_gates(x, SEParams<double>(c, 4)), tfwse_gates(x, SEParams<double>(f, 2))};
  bool open_interval = true, half = true;
  for (const auto& g : gates)
    for (double v : g.data()) open_interval = open_interval && v > 0 && v < 1;
  for (const auto& g : zero_gates)
    for (double v : g.data()) half = half && v == 0.5;
  if (!open_interval) failed.push_back("gates outside (0,1)");
  if (!half) failed.push_back("zero-weight gates != 0.5");

  auto block = make_bc_resblock<double>(BlockKind::normal, c, c, 1, 2, 2, 0.0);
  const auto xb = Td::uniform({n, c, 4, t}, -1, 1, 44);
  const auto yb = bc_resblock(xb, block, Mode::eval);
  bool reduces = true;
  for (std::size_t i = 0; i < xb.numel(); ++i) reduces = reduces && yb[i] == std::max(0.0, xb[i]);
  if (!reduces) failed.push_back("zeroed block != relu(x)");

  auto rb = make_bc_resblock<double>(BlockKind::normal, 3, 3, 1, 1, 1, 0.0);
  std::uint64_t k = 0;
  rb.for_each_param("", [&](const std::string&, Td& p, bool) { p = Td::uniform(p.shape(), -0.8, 0.8, mix_seed(45, ++k)); });
  const auto xr = Td::uniform({2, 3, 4, 5}, -1, 1, 46);
  const auto br = bc_resblock_branches(xr, rb, Mode::train, 0);
  const auto yr = bc_resblock(xr, rb, Mode::train);
  bool broadcast = br.temporal.shape() == Shape{2, 3, 1, 5};
  for (std::size_t nc = 0; nc < 6 && broadcast; ++nc)
    for (std::size_t fi = 0; fi < 4; ++fi)
      for (std::size_t ti = 0; ti < 5; ++ti) {
        const std::size_t i = (nc * 4 + fi) * 5 + ti;
        broadcast = broadcast && yr[i] == std::max(0.0, xr[i] + (br.freq[i] + br.temporal[nc * 5 + ti]));
      }
  if (!broadcast) failed.push_back("temporal broadcast");

  std::string detail = fmt("squeeze errors %.1e / %.1e (< %.0e); gates, zero-weight 0.5, relu reduction, broadcast",
                           se_err, tf_err, kSqueezeTol);
  for (const auto& s : failed) detail += "; FAILED " + s;
  return verdict(failed.empty(), detail);
}

// ---- 5 ----------------------------------------------------------------------

Outcome overfit_harness() {
  const auto t0 = std::chrono::steady_clock::now();
  ModelConfig mc;
  mc.tau = 1;
  mc.dropout = 0;
  mc.frames = 98;
  mc.seed = 5;
  BcSeNet<float> m(mc);
  std::vector<FeatureMap> maps;
  std::vector<int> labels;
  for (std::size_t i = 0; i < kOverfitSamples; ++i) {
    const std::size_t label = i % mc.num_classes;
    maps.push_back(log_mel(testing::tone_example(label, 16000, mix_seed(77, i))));
    labels.push_back(static_cast<int>((i * 5) % mc.num_classes));  // labels unrelated to the audio
  }
  const auto x = stack_features<float>(maps);
  auto params = m.parameters();
  OptimizerState<float> state;
  state.kind = OptimKind::adam;
  const OptimConfig cfg = OptimConfig::adam50();
  StepResult r;
  std::size_t steps = 0;
  while (steps < kOverfitSteps) {
    r = train_step(m, x, labels, params, state, 1e-3, cfg, steps);
    ++steps;
    if (r.correct == kOverfitSamples) break;
  }
  const double acc = 100.0 * static_cast<double>(r.correct) / kOverfitSamples;
  const double sec = seconds_since(t0);
  return verdict(acc > kOverfitAcc && sec < kOverfitBudgetSec,
                 fmt("train accuracy %.1f%% (> %.0f%%) after %zu Adam steps (<= %zu), loss %.4f, %.1f s", acc,
                     kOverfitAcc, steps, kOverfitSteps, r.loss, sec));
}

// ---- 6 ----------------------------------------------------------------------

struct DeskRun {
  double best_val = 0;
  double seconds = 0;
  std::size_t train = 0, val = 0;
};

// Two keywords, no unknown/silence, BC-SENet-1, SGD recipe cut to 20 epochs
// with a one-epoch warmup.
DeskRun desk_scale_run(const fs::path& root, const fs::path& val_list, const fs::path& test_list) {
  GscOptions go;
  go.unknown_and_silence = false;
  const auto manifest = scan_gsc(root, val_list, test_list, {"yes", "no"}, go);
  ModelConfig mc;
  mc.tau = 1;
  mc.num_classes = 2;
  mc.labels = {"yes", "no"};
  mc.seed = 1;
  BcSeNet<float> model(mc);
  TrainOptions opts;
  opts.optim = OptimConfig::sgd200();
  opts.optim.epochs = kDeskEpochs;
  opts.optim.warmup_epochs = 1;
  opts.seed = 1;
  opts.plan = {0.0, 0.0};
  const auto h = train(model, manifest, opts);
  return {h.best_val_acc, h.wall_seconds, manifest.count(Split::train), manifest.count(Split::val)};
}

Outcome desk_scale_training() {
  const char* root = std::getenv("BCSE_GSC_ROOT");
  if (root == nullptr || !fs::is_directory(root))
    return {Status::skip, "BCSE_GSC_ROOT not set; Speech Commands is not available here"};
  const fs::path r(root);
  const DeskRun d = desk_scale_run(r, r / "validation_list.txt", r / "testing_list.txt");
  return verdict(d.best_val >= kDeskValAcc && d.seconds <= kDeskBudgetSec,
                 fmt("yes/no, %zu train / %zu val clips, best val accuracy %.2f%% (>= %.0f%%), %.0f s (<= %.0f s)",
                     d.train, d.val, d.best_val, kDeskValAcc, d.seconds, kDeskBudgetSec));
}

// Synthetic stand-in with the same code path: rising vs falling chirps in
// pink noise, laid out as a two-word Speech Commands tree.
std::string desk_scale_proxy() {
  testing::TempDir dir("desk_proxy");
  const std::size_t per_class = 150;
  std::string val_lines, test_lines;
  for (std::size_t label = 0; label < 2; ++label) {
    const std::string word = label == 0 ? "yes" : "no";
    fs::create_directories(dir / word);
    for (std::size_t i = 0; i < per_class; ++i) {
      Rng rng(mix_seed(label * 1000 + i, 61));
      const double f0 = rng.uniform(300, 800), f1 = rng.uniform(1500, 3000);
      const double start = rng.uniform(0.0, 0.3), len = rng.uniform(0.4, 0.6);
      AudioClip c;
      c.samples.assign(16000, 0.0f);
      double phase = 0;
      for (std::size_t s = 0; s < 16000; ++s) {
        const double u = (static_cast<double>(s) / kSampleRate - start) / len;
        if (u < 0 || u > 1) continue;
        const double hz = label == 0 ? f0 + (f1 - f0) * u : f1 + (f0 - f1) * u;
        phase += 2 * std::numbers::pi * hz / kSampleRate;
        c.samples[s] = static_cast<float>(0.4 * std::sin(phase) * std::sin(std::numbers::pi * u));
      }
      c = mix_at_snr(c, colored_noise(16000, NoiseKind::pink, mix_seed(label * 1000 + i, 62)), 5.0);
      const std::string name = "c" + std::to_string(i) + ".wav";
      save_wav(dir / word / name, c);
      if (i % 5 == 0) val_lines += word + "/" + name + "\n";
      else if (i % 10 == 1) test_lines += word + "/" + name + "\n";
    }
  }
  testing::write_text(dir / "validation_list.txt", val_lines);
  testing::write_text(dir / "testing_list.txt", test_lines);
  const DeskRun d = desk_scale_run(dir.path(), dir / "validation_list.txt", dir / "testing_list.txt");
  return fmt("synthetic chirp proxy (not the criterion): %zu train / %zu val clips, best val accuracy %.2f%%, %.0f s",
             d.train, d.val, d.best_val, d.seconds);
}

// ---- 7 ----------------------------------------------------------------------

Outcome schedule_conformance() {
  const OptimConfig c = OptimConfig::sgd200();
  const std::size_t spe = 300;  // ~30K clips at batch 100
  const std::size_t W = c.warmup_epochs * spe, S = c.epochs * spe;
  const double v0 = lr_at(0, spe, c), vw = lr_at(W, spe, c), vm = lr_at(W + (S - W) / 2, spe, c),
               vs = lr_at(S, spe, c);
  const bool ok = std::abs(v0) <= kScheduleTol && std::abs(vw - 0.1) <= kScheduleTol &&
                  std::abs(vm - 0.05) <= kScheduleTol && std::abs(vs) <= kScheduleTol;
  return verdict(ok, fmt("lr(0)=%.3g lr(W)=%.15g lr(mid)=%.15g lr(S)=%.3g (tol %.0e)", v0, vw, vm, vs, kScheduleTol));
}

// ---- 8 ----------------------------------------------------------------------

Outcome snr_mixer() {
  testing::TempDir dir("snr");
  testing::write_tone_corpus(dir.path(), {"a", "b", "c"}, 8, 12000);
  const auto manifest = scan_folder_corpus(dir.path(), {"a", "b", "c"}, 16000);
  const ExampleLoader loader(manifest);
  const auto plan = plan_epoch(manifest, Split::train, kEvalPlanSeed, {0, 0});
  const double snrs[] = {-10.0, 0.0, 10.0};
  double worst = 0;
  std::size_t measured = 0;
  for (NoiseKind kind : {NoiseKind::white, NoiseKind::pink, NoiseKind::brown})
    for (std::size_t k = 0; k < 3; ++k) {
      const auto transform = noise_transform(snrs[k], kind, 17, k);
      for (std::size_t pos = 0; pos < plan.size(); ++pos) {
        const AudioClip clean = loader.clip(plan[pos]);
        const AudioClip mixed = transform(clean, pos);
        double ps = 0, pn = 0;
        for (std::size_t i = 0; i < clean.size(); ++i) {
          const double s = clean.samples[i], d = static_cast<double>(mixed.samples[i]) - s;
          ps += s * s;
          pn += d * d;
        }
        worst = std::max(worst, std::abs(10 * std::log10(ps / pn) - snrs[k]));
        ++measured;
      }
    }
  return verdict(worst <= kSnrTolDb, fmt("%zu mixed evaluation clips at -10/0/10 dB, white/pink/brown, max deviation "
                                         "%.2e dB (<= %.2f dB)",
                                         measured, worst, kSnrTolDb));
}

// ---- 9 ----------------------------------------------------------------------

Outcome determinism_and_serialization() {
  testing::TempDir dir("det");
  testing::write_tone_corpus(dir.path(), {"a", "b", "c"}, 12, 4000);
  const auto manifest = scan_folder_corpus(dir.path(), {"a", "b", "c"}, 8000);
  auto run = [&](const fs::path& ckpt, std::vector<double>& losses) {
    ModelConfig mc;
    mc.tau = 1;
    mc.num_classes = 3;
    mc.frames = 48;
    mc.seed = 3;
    BcSeNet<float> model(mc);
    TrainOptions o;
    o.optim = OptimConfig::sgd200();
    o.optim.epochs = 4;
    o.optim.warmup_epochs = 1;
    o.optim.batch_size = 10;
    o.seed = 8;
    o.plan = {0, 0};
    o.checkpoint = ckpt;
    for (const auto& r : train(model, manifest, o).epochs) losses.push_back(r.train_loss);
    return model;
  };
  std::vector<double> la, lb;
  auto a = run(dir / "a.bcse", la);
  auto b = run(dir / "b.bcse", lb);
  const bool same_losses = la == lb && la.size() == 4;

  const auto x = Tensor<float>::uniform({4, 1, 40, 98}, -10, 2, 90);
  save_checkpoint<float>(a, nullptr, dir / "final.bcse");
  auto loaded = load_checkpoint<float>(dir / "final.bcse");
  const auto ya = a.forward(x, Mode::eval), yl = loaded.model.forward(x, Mode::eval);
  bool bitwise = ya.shape() == yl.shape();
  for (std::size_t i = 0; bitwise && i < ya.numel(); ++i)
    bitwise = std::memcmp(&ya.data()[i], &yl.data()[i], sizeof(float)) == 0;
  return verdict(same_losses && bitwise, fmt("epoch losses %s over %zu epochs; reloaded logits %s", same_losses ? "identical" : "DIFFER",
                                             la.size(), bitwise ? "bitwise identical" : "DIFFER"));
}

// ---- 10 ---------------------------------------------------------------------

Outcome full_scale_statement() {
  std::ifstream in(fs::path(BCSE_SOURCE_DIR) / "README.md");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string readme = ss.str();
  const bool documented = readme.find("## Full-scale results") != std::string::npos &&
                          readme.find("not acceptance gates") != std::string::npos;
  std::string detail = documented ? "README states full-scale numbers are not gates and documents the >= 96% target"
                                  : "README lacks the full-scale statement";
  const char* ckpt = std::getenv("BCSE_GSC_FULL_CKPT");
  const char* root = std::getenv("BCSE_GSC_ROOT");
  if (ckpt && root && fs::exists(ckpt)) {
    auto loaded = load_checkpoint<float>(ckpt);
    const fs::path r(root);
    const auto manifest = scan_gsc(r, r / "validation_list.txt", r / "testing_list.txt");
    const double acc = evaluate(loaded.model, ExampleLoader(manifest), Split::test);
    detail += fmt("; optional run: test accuracy %.2f%% vs target %.0f%% (non-blocking)", acc, kFullScaleTarget);
  } else {
    detail += "; optional full run not provided (BCSE_GSC_FULL_CKPT)";
  }
  return verdict(documented, detail);
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

int main_impl(int argc, char** argv) {
  int only = 0;
  if (argc == 3 && std::string(argv[1]) == "--only") only = std::atoi(argv[2]);
  const std::vector<Criterion> criteria{
      {1, "gradient correctness", gradient_correctness},
      {2, "convolution oracle", convolution_oracle},
      {3, "parameter-count audit", parameter_audit},
      {4, "layer identities", layer_identities},
      {5, "overfit harness", overfit_harness},
      {6, "desk-scale training", desk_scale_training},
      {7, "schedule conformance", schedule_conformance},
      {8, "SNR mixer", snr_mixer},
      {9, "determinism and serialization", determinism_and_serialization},
      {10, "full-scale claims statement", full_scale_statement},
  };
  int failed = 0, skipped = 0, ran = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    ++ran;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Status::fail, std::string("error: ") + e.what()};
    }
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    std::cout << tag << ' ' << c.id << " " << c.name << ": " << o.detail << std::endl;
    if (o.status == Status::fail) ++failed;
    if (o.status == Status::skip) {
      ++skipped;
      if (c.id == 6 && only == 0) {
        try {
          std::cout << "     6 " << desk_scale_proxy() << std::endl;
        } catch (const std::exception& e) {
          std::cout << "     6 proxy error: " << e.what() << std::endl;
        }
      }
    }
  }
  if (ran == 0) {
    std::cerr << "usage: acceptance [--only N]\n";
    return 2;
  }
  std::cout << "summary: " << ran - failed - skipped << " passed, " << failed << " failed, " << skipped << " skipped"
            << std::endl;
  if (failed) return 1;
  if (only != 0 && skipped) return kSkipCode;
  return 0;
}

}  // namespace
}  // namespace bcse::acceptance

int main(int argc, char** argv) { return bcse::acceptance::main_impl(argc, argv); }
