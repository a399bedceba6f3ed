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

// Command-line front end. `dispatch` is the whole program; tools/main.cpp
// only forwards argv to it.
//
// Exit codes: 0 success, 1 usage error, 2 data or model error.
// Metrics go to `out`, the resolved configuration and progress to `err`.

#ifndef BCSE_CLI_HPP_
#define BCSE_CLI_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "bcse/audio.hpp"
#include "bcse/checkpoint.hpp"
#include "bcse/dataset.hpp"
#include "bcse/features.hpp"
#include "bcse/gradcheck.hpp"
#include "bcse/loss.hpp"
#include "bcse/model.hpp"
#include "bcse/noise.hpp"
#include "bcse/optim.hpp"
#include "bcse/train.hpp"

namespace bcse {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

// Pass threshold of the `gradcheck` subcommand.
inline constexpr double kGradCheckThreshold = 1e-4;

struct RunConfig {
  std::string command;
  std::string config_file;

  // data
  std::string data;
  std::string task = "gsc12";
  std::vector<std::string> keywords;
  bool unknown_silence = true;
  std::string val_list;
  std::string test_list;
  std::string split = "test";

  // model
  double tau = 1.0;
  std::string attention = "se_tfwse";
  double dropout = 0.1;

  // recipe
  std::string recipe = "sgd200";
  long epochs = -1;
  long batch_size = -1;
  double lr = -1.0;
  long warmup_epochs = -1;
  double weight_decay = -1.0;
  std::uint64_t seed = 0;

  // io
  std::string out;
  std::string ckpt;
  std::string wav;

  // noise
  std::vector<double> snrs{-10.0, 0.0, 10.0};
  std::string noise = "pink";

  // gradcheck
  std::string component = "all";
  double eps = 1e-4;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Flat key=value file; '#' starts a comment line.
inline std::vector<std::pair<std::string, std::string>> read_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CLI::ConversionError(path + ":" + std::to_string(lineno) + ": expected key=value, got '" + line + "'");
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::string fixed(double v, int digits) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline OptimConfig resolve_recipe(const RunConfig& rc) {
  OptimConfig oc = rc.recipe == "adam50" ? OptimConfig::adam50() : OptimConfig::sgd200();
  if (rc.epochs > 0) oc.epochs = static_cast<std::size_t>(rc.epochs);
  if (rc.batch_size > 0) oc.batch_size = static_cast<std::size_t>(rc.batch_size);
  if (rc.lr >= 0) oc.lr_peak = rc.lr;
  if (rc.warmup_epochs >= 0) oc.warmup_epochs = static_cast<std::size_t>(rc.warmup_epochs);
  if (rc.weight_decay >= 0) oc.weight_decay = rc.weight_decay;
  oc.validate();
  return oc;
}

inline Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  return Split::test;
}

// Manifest for training, from the task flags.
inline DatasetManifest scan_for_training(const RunConfig& rc) {
  const std::filesystem::path root = rc.data;
  if (rc.task == "folder")
    return scan_folder_corpus(root, rc.keywords.empty() ? list_class_folders(root) : rc.keywords);
  GscOptions go;
  go.unknown_and_silence = rc.unknown_silence;
  return scan_gsc(root, rc.val_list.empty() ? root / "validation_list.txt" : std::filesystem::path(rc.val_list),
                  rc.test_list.empty() ? root / "testing_list.txt" : std::filesystem::path(rc.test_list),
                  rc.keywords.empty() ? gsc_keywords() : rc.keywords, go);
}

// Manifest for a trained model: the class list stored in the checkpoint
// decides the layout.
inline DatasetManifest scan_for_model(const RunConfig& rc, const ModelConfig& mc) {
  RunConfig r = rc;
  const auto& labels = mc.labels;
  const bool gsc_tail = labels.size() >= 2 && labels[labels.size() - 2] == "unknown" && labels.back() == "silence";
  if (rc.task == "folder") {
    r.keywords = labels;
  } else if (gsc_tail) {
    r.keywords.assign(labels.begin(), labels.end() - 2);
    r.unknown_silence = true;
  } else {
    r.keywords = labels;
    r.unknown_silence = false;
  }
  auto m = scan_for_training(r);
  if (m.label_names != labels) throw Error(Errc::invalid_config, "dataset classes do not match the checkpoint");
  return m;
}

inline AudioClip clip_for_model(const std::string& wav, const ModelConfig& mc) {
  return fix_length(load_wav(wav), samples_for_frames(mc.frames));
}

inline int run_features(const RunConfig& rc, std::ostream& out) {
  const FeatureMap fm = log_mel(load_wav(rc.wav));
  if (!rc.out.empty()) {
    std::vector<unsigned char> blob;
    for (std::uint32_t v : {1u, static_cast<std::uint32_t>(fm.n_mels), static_cast<std::uint32_t>(fm.frames)})
      put_le32(blob, v);
    for (float v : fm.values) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      put_le32(blob, bits);
    }
    std::ofstream f(rc.out, std::ios::binary);
    f.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
    if (!f) throw Error(Errc::io, "cannot write " + rc.out);
    out << "mels=" << fm.n_mels << " frames=" << fm.frames << " out=" << rc.out << "\n";
    return kExitOk;
  }
  out << "mels=" << fm.n_mels << " frames=" << fm.frames << "\n";
  char buf[32];
  for (std::size_t m = 0; m < fm.n_mels; ++m) {
    for (std::size_t t = 0; t < fm.frames; ++t) {
      std::snprintf(buf, sizeof buf, "%s%.6g", t ? " " : "", static_cast<double>(fm.at(m, t)));
      out << buf;
    }
    out << "\n";
  }
  return kExitOk;
}

inline int run_params(const RunConfig& rc, std::ostream& out) {
  ModelConfig mc;
  mc.tau = rc.tau;
  mc.attention = parse_attention_mode(rc.attention);
  out << "params=" << count_params(mc) << "\n";
  return kExitOk;
}

inline int run_train(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const OptimConfig oc = resolve_recipe(rc);
  const DatasetManifest manifest = scan_for_training(rc);
  for (const auto& w : manifest.warnings) err << "warning: " << w << "\n";
  ModelConfig mc;
  mc.tau = rc.tau;
  mc.attention = parse_attention_mode(rc.attention);
  mc.dropout = rc.dropout;
  mc.seed = rc.seed;
  mc.num_classes = manifest.num_classes();
  mc.labels = manifest.label_names;
  mc.frames = num_frames(manifest.target_samples);
  BcSeNet<float> model(mc);
  err << "train=" << manifest.count(Split::train) << " val=" << manifest.count(Split::val)
      << " test=" << manifest.count(Split::test) << " params=" << model.num_params() << "\n";

  TrainOptions to;
  to.optim = oc;
  to.seed = rc.seed;
  to.checkpoint = rc.out;
  to.log = &err;
  const TrainHistory h = train(model, manifest, to);
  for (const auto& r : h.epochs) out << "epoch " << TrainHistory::format_record(r) << "\n";
  out << "best_val_acc=" << fixed(h.best_val_acc, 2) << " best_epoch=" << h.best_epoch << "\n";
  err << "wall_seconds=" << fixed(h.wall_seconds, 1) << "\n";
  return kExitOk;
}

inline int run_eval(const RunConfig& rc, std::ostream& out) {
  auto loaded = load_checkpoint<float>(rc.ckpt);
  const DatasetManifest manifest = scan_for_model(rc, loaded.model.config());
  ExampleLoader loader(manifest, false);
  const EvalResult r = evaluate_detailed(loaded.model, loader, parse_split(rc.split));
  out << "split=" << rc.split << " accuracy=" << fixed(r.accuracy, 2) << " correct=" << r.correct
      << " total=" << r.total << "\n";
  return kExitOk;
}

inline int run_eval_noise(const RunConfig& rc, std::ostream& out) {
  auto loaded = load_checkpoint<float>(rc.ckpt);
  const DatasetManifest manifest = scan_for_model(rc, loaded.model.config());
  ExampleLoader loader(manifest, false);
  const auto rows =
      eval_noise(loaded.model, loader, parse_split(rc.split), rc.snrs, parse_noise_kind(rc.noise), rc.seed);
  for (const auto& row : rows)
    out << "noise=" << rc.noise << " snr_db=" << fixed(row.snr_db, 1) << " accuracy=" << fixed(row.accuracy, 2) << "\n";
  return kExitOk;
}

inline int run_predict(const RunConfig& rc, std::ostream& out) {
  auto loaded = load_checkpoint<float>(rc.ckpt);
  BcSeNet<float>& model = loaded.model;
  const ModelConfig& mc = model.config();
  Tensor<float> logits;
  {
    NoGradScope<float> no_grad;
    logits = model.forward(log_mel(clip_for_model(rc.wav, mc)).to_tensor<float>(), Mode::eval);
  }
  const std::vector<double> p = softmax_rows(logits);
  std::vector<std::size_t> order(p.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
  const std::size_t k = std::min<std::size_t>(3, order.size());
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t c = order[r];
    const std::string name = c < mc.labels.size() ? mc.labels[c] : std::to_string(c);
    out << r + 1 << " " << name << " " << fixed(p[c], 6) << "\n";
  }
  return kExitOk;
}

inline int run_gradcheck(const RunConfig& rc, std::ostream& out) {
  std::vector<std::string> names;
  if (rc.component == "all") {
    names = grad_check_components();
  } else {
    names = split_list(rc.component);
  }
  bool ok = true;
  char buf[64];
  for (const auto& name : names) {
    const GradCheckResult r = grad_check(name, {}, rc.eps, rc.seed);
    std::snprintf(buf, sizeof buf, "%.3e", r.max_rel_error);
    const bool pass = r.max_rel_error < kGradCheckThreshold;
    ok = ok && pass;
    out << (pass ? "PASS " : "FAIL ") << name << " max_rel_error=" << buf << " at=" << r.location
        << " checked=" << r.checked << "\n";
  }
  return ok ? kExitOk : kExitFailure;
}

}  // namespace detail

inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig rc;
  CLI::App app{"BC-SENet keyword spotting", "bcse"};
  app.require_subcommand(1);

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", rc.config_file, "key=value file; flags on the command line take precedence");
  };
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--tau", rc.tau, "width multiplier")->check(CLI::PositiveNumber);
    sub->add_option("--attention", rc.attention, "attention mode")->check(CLI::IsMember({"none", "se_tfwse"}));
  };
  auto add_data = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--data", rc.data, "dataset root");
    if (required) opt->required();
    sub->add_option("--task", rc.task, "dataset layout")->check(CLI::IsMember({"gsc12", "folder"}));
    sub->add_option("--keywords", rc.keywords, "comma separated class words")->delimiter(',');
    sub->add_option("--unknown-silence", rc.unknown_silence, "add unknown and silence classes (gsc12)");
    sub->add_option("--val-list", rc.val_list, "validation list file (gsc12)");
    sub->add_option("--test-list", rc.test_list, "testing list file (gsc12)");
  };

  auto* features = app.add_subcommand("features", "dump the log-Mel feature map of a WAV file");
  add_config(features);
  features->add_option("wav", rc.wav, "16 kHz mono 16-bit WAV")->required();
  features->add_option("--out", rc.out, "write a binary blob instead of text");

  auto* train_cmd = app.add_subcommand("train", "train a model");
  add_config(train_cmd);
  add_data(train_cmd, true);
  add_model(train_cmd);
  train_cmd->add_option("--dropout", rc.dropout)->check(CLI::Range(0.0, 0.99));
  train_cmd->add_option("--recipe", rc.recipe)->check(CLI::IsMember({"sgd200", "adam50"}));
  train_cmd->add_option("--epochs", rc.epochs, "override the recipe epoch count");
  train_cmd->add_option("--batch-size", rc.batch_size);
  train_cmd->add_option("--lr", rc.lr, "override the peak learning rate");
  train_cmd->add_option("--warmup-epochs", rc.warmup_epochs);
  train_cmd->add_option("--weight-decay", rc.weight_decay);
  train_cmd->add_option("--seed", rc.seed);
  train_cmd->add_option("--out", rc.out, "checkpoint path")->required();

  auto* eval_cmd = app.add_subcommand("eval", "accuracy of a checkpoint on a split");
  add_config(eval_cmd);
  eval_cmd->add_option("--ckpt", rc.ckpt)->required();
  add_data(eval_cmd, true);
  eval_cmd->add_option("--split", rc.split)->check(CLI::IsMember({"train", "val", "test"}));

  auto* noise_cmd = app.add_subcommand("eval-noise", "accuracy under additive colored noise");
  add_config(noise_cmd);
  noise_cmd->add_option("--ckpt", rc.ckpt)->required();
  add_data(noise_cmd, true);
  noise_cmd->add_option("--split", rc.split)->check(CLI::IsMember({"train", "val", "test"}));
  noise_cmd->add_option("--snr", rc.snrs, "comma separated SNRs in dB")->delimiter(',');
  noise_cmd->add_option("--noise", rc.noise)->check(CLI::IsMember({"white", "pink", "brown"}));
  noise_cmd->add_option("--seed", rc.seed);

  auto* predict_cmd = app.add_subcommand("predict", "top-3 classes for a WAV file");
  add_config(predict_cmd);
  predict_cmd->add_option("--ckpt", rc.ckpt)->required();
  predict_cmd->add_option("wav", rc.wav)->required();

  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient check");
  add_config(grad_cmd);
  grad_cmd->add_option("--component", rc.component, "component name, comma list or 'all'");
  grad_cmd->add_option("--eps", rc.eps)->check(CLI::PositiveNumber);
  grad_cmd->add_option("--seed", rc.seed);

  auto* params_cmd = app.add_subcommand("params", "parameter count of a configuration");
  add_config(params_cmd);
  add_model(params_cmd);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
    CLI::App* sub = app.get_subcommands().front();
    if (!rc.config_file.empty()) {
      std::vector<std::string> extra;
      for (const auto& [key, value] : detail::read_kv_file(rc.config_file)) {
        CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (opt == nullptr || key == "config")
          throw CLI::ValidationError("--config", "unknown key '" + key + "' in " + rc.config_file);
        if (opt->count() == 0) {
          extra.push_back("--" + key);
          extra.push_back(value);
        }
      }
      if (!extra.empty()) {
        args.insert(args.end(), extra.begin(), extra.end());
        rc = RunConfig{};
        std::vector<std::string> again(args.rbegin(), args.rend());
        app.parse(again);
        sub = app.get_subcommands().front();
      }
    }
    rc.command = sub->get_name();
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  err << "# command=" << rc.command << "\n" << app.get_subcommands().front()->config_to_str(true, false);

  try {
    if (rc.command == "features") return detail::run_features(rc, out);
    if (rc.command == "params") return detail::run_params(rc, out);
    if (rc.command == "train") return detail::run_train(rc, out, err);
    if (rc.command == "eval") return detail::run_eval(rc, out);
    if (rc.command == "eval-noise") return detail::run_eval_noise(rc, out);
    if (rc.command == "predict") return detail::run_predict(rc, out);
    if (rc.command == "gradcheck") return detail::run_gradcheck(rc, out);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace bcse

#endif  // BCSE_CLI_HPP_
