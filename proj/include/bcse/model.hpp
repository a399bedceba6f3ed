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

#ifndef BCSE_MODEL_HPP_
#define BCSE_MODEL_HPP_

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bcse/attention.hpp"
#include "bcse/bc_block.hpp"
#include "bcse/conv.hpp"
#include "bcse/mode.hpp"
#include "bcse/norm.hpp"
#include "bcse/ops.hpp"
#include "bcse/random.hpp"

namespace bcse {

enum class AttentionMode { none, se_tfwse };
enum class StageAttention { none, se, tfwse };

inline const char* to_string(AttentionMode m) { return m == AttentionMode::none ? "none" : "se_tfwse"; }

inline AttentionMode parse_attention_mode(const std::string& s) {
  if (s == "none") return AttentionMode::none;
  if (s == "se_tfwse") return AttentionMode::se_tfwse;
  throw Error(Errc::invalid_config, "attention mode '" + s + "' (expected none or se_tfwse)");
}

inline const char* to_string(StageAttention a) {
  switch (a) {
    case StageAttention::se: return "se";
    case StageAttention::tfwse: return "tfwse";
    default: return "none";
  }
}

inline StageAttention parse_stage_attention(const std::string& s) {
  if (s == "none") return StageAttention::none;
  if (s == "se") return StageAttention::se;
  if (s == "tfwse") return StageAttention::tfwse;
  throw Error(Errc::invalid_config, "stage attention '" + s + "' (expected none, se or tfwse)");
}

// Stage table of the network body. Channel counts are multiplied by tau.
inline constexpr std::array<std::size_t, 4> kStageChannels{8, 12, 16, 20};
inline constexpr std::array<std::size_t, 4> kStageDepths{2, 2, 4, 4};
inline constexpr std::array<std::size_t, 4> kStageFreqStrides{1, 2, 2, 1};
inline constexpr std::array<std::size_t, 4> kStageDilations{1, 2, 4, 8};
inline constexpr std::size_t kStemChannels = 16;
inline constexpr std::size_t kHeadChannels = 32;

struct ModelConfig {
  double tau = 1.0;
  std::size_t num_classes = 12;
  std::size_t ssn_subbands = 5;
  std::size_t se_ratio = 4;
  std::size_t tfwse_ratio = 4;
  AttentionMode attention = AttentionMode::se_tfwse;
  // Attention after each stage when `attention` is se_tfwse.
  std::array<StageAttention, 4> placement{StageAttention::tfwse, StageAttention::tfwse, StageAttention::se,
                                          StageAttention::se};
  std::size_t n_mels = 40;
  std::size_t frames = 98;
  double dropout = 0.1;
  std::uint64_t seed = 0;
  std::vector<std::string> labels;  // optional class names, size num_classes when present

  std::size_t scaled(std::size_t base) const {
    const long c = std::lround(static_cast<double>(base) * tau);
    return c < 1 ? 1 : static_cast<std::size_t>(c);
  }

  StageAttention stage_attention(std::size_t stage) const {
    return attention == AttentionMode::none ? StageAttention::none : placement[stage];
  }

  std::vector<std::pair<std::string, std::string>> to_kv() const {
    std::ostringstream placement_text, label_text, tau_text, dropout_text;
    for (std::size_t i = 0; i < placement.size(); ++i) placement_text << (i ? "," : "") << to_string(placement[i]);
    for (std::size_t i = 0; i < labels.size(); ++i) label_text << (i ? "," : "") << labels[i];
    tau_text.precision(17);
    tau_text << tau;
    dropout_text.precision(17);
    dropout_text << dropout;
    return {{"tau", tau_text.str()},
            {"num_classes", std::to_string(num_classes)},
            {"ssn_subbands", std::to_string(ssn_subbands)},
            {"se_ratio", std::to_string(se_ratio)},
            {"tfwse_ratio", std::to_string(tfwse_ratio)},
            {"attention", to_string(attention)},
            {"placement", placement_text.str()},
            {"n_mels", std::to_string(n_mels)},
            {"frames", std::to_string(frames)},
            {"dropout", dropout_text.str()},
            {"seed", std::to_string(seed)},
            {"labels", label_text.str()}};
  }

  static ModelConfig from_kv(const std::vector<std::pair<std::string, std::string>>& kv) {
    ModelConfig c;
    auto split = [](const std::string& s) {
      std::vector<std::string> parts;
      std::string cur;
      std::istringstream is(s);
      while (std::getline(is, cur, ',')) parts.push_back(cur);
      return parts;
    };
    try {
      for (const auto& [k, v] : kv) {
        if (k == "tau") c.tau = std::stod(v);
        else if (k == "num_classes") c.num_classes = std::stoul(v);
        else if (k == "ssn_subbands") c.ssn_subbands = std::stoul(v);
        else if (k == "se_ratio") c.se_ratio = std::stoul(v);
        else if (k == "tfwse_ratio") c.tfwse_ratio = std::stoul(v);
        else if (k == "attention") c.attention = parse_attention_mode(v);
        else if (k == "placement") {
          const auto parts = split(v);
          if (parts.size() != 4) throw Error(Errc::invalid_config, "placement needs four entries");
          for (std::size_t i = 0; i < 4; ++i) c.placement[i] = parse_stage_attention(parts[i]);
        } else if (k == "n_mels") c.n_mels = std::stoul(v);
        else if (k == "frames") c.frames = std::stoul(v);
        else if (k == "dropout") c.dropout = std::stod(v);
        else if (k == "seed") c.seed = std::stoull(v);
        else if (k == "labels") c.labels = split(v);
        else throw Error(Errc::invalid_config, "unknown model config key '" + k + "'");
      }
    } catch (const std::logic_error& e) {
      throw Error(Errc::invalid_config, std::string("malformed model config value: ") + e.what());
    }
    return c;
  }
};

template <typename T>
struct NamedParam {
  std::string name;
  Tensor<T> tensor;  // shares storage with the model
  bool decayed;      // conv/FC weights; biases and norm affine terms are not
};

template <typename T>
class BcSeNet {
 public:
  explicit BcSeNet(ModelConfig config) : config_(std::move(config)) {
    build();
    initialize();
  }

  const ModelConfig& config() const { return config_; }

  // Logits [N, num_classes] for features [N, 1, n_mels, T]. When `trace` is
  // given it receives each stage output before and after its attention.
  Tensor<T> forward(const Tensor<T>& x, Mode mode, std::vector<Tensor<T>>* trace = nullptr) {
    if (x.rank() != 4 || x.dim(1) != 1 || x.dim(2) != config_.n_mels)
      throw Error(Errc::shape_mismatch, "model expects [N,1," + std::to_string(config_.n_mels) + ",T], got " +
                                            shape_str(x.shape()));
    const std::uint64_t pass = mode == Mode::train ? train_passes_++ : 0;
    Tensor<T> h = relu(batchnorm2d(conv2d(x, stem_spec(), stem_weight_, stem_bias_), stem_norm_, mode));
    std::size_t block_index = 0;
    for (std::size_t s = 0; s < stages_.size(); ++s) {
      Stage& stage = stages_[s];
      for (auto& block : stage.blocks) {
        const std::uint64_t seed = mix_seed(mix_seed(config_.seed, pass), block_index++);
        h = bc_resblock(h, block, mode, seed);
      }
      if (trace) trace->push_back(h);
      if (stage.attention == StageAttention::se) h = se_block(h, stage.excitation);
      else if (stage.attention == StageAttention::tfwse) h = tfwse_block(h, stage.excitation);
      if (trace) trace->push_back(h);
    }
    h = conv2d(h, head_dw_spec(), head_dw_weight_);
    h = relu(batchnorm2d(conv2d(h, head_pw_spec(), head_pw_weight_), head_norm_, mode));
    h = reduce_mean(h, {2, 3}, true);
    h = conv2d(h, classifier_spec(), classifier_weight_, classifier_bias_);
    return reshape(h, {x.dim(0), config_.num_classes});
  }

  // fn(name, tensor&, decayed) over learnable tensors in a fixed order.
  template <typename Fn>
  void for_each_param(Fn&& fn) {
    fn("stem.conv.weight", stem_weight_, true);
    fn("stem.conv.bias", stem_bias_, false);
    fn("stem.norm.gamma", stem_norm_.gamma, false);
    fn("stem.norm.beta", stem_norm_.beta, false);
    for (std::size_t s = 0; s < stages_.size(); ++s) {
      Stage& stage = stages_[s];
      for (std::size_t b = 0; b < stage.blocks.size(); ++b)
        stage.blocks[b].for_each_param(block_prefix(s, b), fn);
      if (stage.attention != StageAttention::none) {
        const std::string p = "stage" + std::to_string(s + 1) + "." + to_string(stage.attention) + ".";
        fn(p + "w1", stage.excitation.w1, true);
        fn(p + "b1", stage.excitation.b1, false);
        fn(p + "w2", stage.excitation.w2, true);
        fn(p + "b2", stage.excitation.b2, false);
      }
    }
    fn("head.dw_conv.weight", head_dw_weight_, true);
    fn("head.pw_conv.weight", head_pw_weight_, true);
    fn("head.norm.gamma", head_norm_.gamma, false);
    fn("head.norm.beta", head_norm_.beta, false);
    fn("head.classifier.weight", classifier_weight_, true);
    fn("head.classifier.bias", classifier_bias_, false);
  }

  // fn(name, tensor&) over running statistics.
  template <typename Fn>
  void for_each_buffer(Fn&& fn) {
    fn("stem.norm.running_mean", stem_norm_.running_mean);
    fn("stem.norm.running_var", stem_norm_.running_var);
    for (std::size_t s = 0; s < stages_.size(); ++s)
      for (std::size_t b = 0; b < stages_[s].blocks.size(); ++b)
        stages_[s].blocks[b].for_each_buffer(block_prefix(s, b), fn);
    fn("head.norm.running_mean", head_norm_.running_mean);
    fn("head.norm.running_var", head_norm_.running_var);
  }

  std::vector<NamedParam<T>> parameters() {
    std::vector<NamedParam<T>> out;
    for_each_param([&](const std::string& name, Tensor<T>& t, bool decayed) { out.push_back({name, t, decayed}); });
    return out;
  }

  std::size_t num_params() {
    std::size_t n = 0;
    for_each_param([&](const std::string&, Tensor<T>& t, bool) { n += t.numel(); });
    return n;
  }

  void zero_grad() {
    for_each_param([](const std::string&, Tensor<T>& t, bool) { t.zero_grad(); });
  }

  std::size_t num_stages() const { return stages_.size(); }
  StageAttention stage_attention(std::size_t s) const { return stages_.at(s).attention; }
  ExcitationParams<T>& stage_excitation(std::size_t s) { return stages_.at(s).excitation; }
  std::vector<BcResBlock<T>>& stage_blocks(std::size_t s) { return stages_.at(s).blocks; }

  // Frequency extent after each stage, for geometry checks.
  const std::vector<std::size_t>& stage_freq_extents() const { return stage_freqs_; }

 private:
  struct Stage {
    std::vector<BcResBlock<T>> blocks;
    StageAttention attention = StageAttention::none;
    ExcitationParams<T> excitation;
  };

  static std::string block_prefix(std::size_t s, std::size_t b) {
    return "stage" + std::to_string(s + 1) + ".block" + std::to_string(b) + ".";
  }

  ConvSpec stem_spec() const {
    return {.in_channels = 1, .out_channels = config_.scaled(kStemChannels), .kf = 5, .kt = 5, .sf = 2, .pf = 2,
            .pt = 2};
  }
  ConvSpec head_dw_spec() const {
    const std::size_t c = config_.scaled(kStageChannels.back());
    return {.in_channels = c, .out_channels = c, .kf = 5, .kt = 5, .pt = 2, .groups = c};
  }
  ConvSpec head_pw_spec() const {
    return {.in_channels = config_.scaled(kStageChannels.back()), .out_channels = config_.scaled(kHeadChannels)};
  }
  ConvSpec classifier_spec() const {
    return {.in_channels = config_.scaled(kHeadChannels), .out_channels = config_.num_classes};
  }

  void build() {
    const ModelConfig& c = config_;
    if (c.num_classes < 2) throw Error(Errc::invalid_config, "num_classes must be at least 2");
    if (!(c.tau > 0.0)) throw Error(Errc::invalid_config, "tau must be positive");
    if (c.ssn_subbands == 0 || c.se_ratio == 0 || c.tfwse_ratio == 0)
      throw Error(Errc::invalid_config, "subband count and attention ratios must be positive");
    if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw Error(Errc::invalid_config, "dropout must be in [0, 1)");
    if (!c.labels.empty() && c.labels.size() != c.num_classes)
      throw Error(Errc::invalid_config, "label list size differs from num_classes");
    try {
      std::size_t freq = conv_output_extent(c.n_mels, 5, 2, 1, 2);
      stem_weight_ = Tensor<T>::zeros(stem_spec().weight_shape()).set_requires_grad(true);
      stem_bias_ = Tensor<T>::zeros({stem_spec().out_channels}).set_requires_grad(true);
      stem_norm_ = NormState<T>(stem_spec().out_channels);
      std::size_t in_c = stem_spec().out_channels;
      for (std::size_t s = 0; s < kStageChannels.size(); ++s) {
        Stage stage;
        const std::size_t ch = c.scaled(kStageChannels[s]);
        freq = conv_output_extent(freq, 3, kStageFreqStrides[s], 1, 1);
        if (freq % c.ssn_subbands != 0)
          throw Error(Errc::invalid_config, "stage " + std::to_string(s + 1) + " frequency extent " +
                                                std::to_string(freq) + " not divisible by " +
                                                std::to_string(c.ssn_subbands) + " subbands");
        for (std::size_t b = 0; b < kStageDepths[s]; ++b) {
          const BlockKind kind = b == 0 ? BlockKind::transition : BlockKind::normal;
          stage.blocks.push_back(make_bc_resblock<T>(kind, b == 0 ? in_c : ch, ch, b == 0 ? kStageFreqStrides[s] : 1,
                                                     kStageDilations[s], c.ssn_subbands, c.dropout));
        }
        stage.attention = c.stage_attention(s);
        if (stage.attention == StageAttention::se)
          stage.excitation = ExcitationParams<T>(ch, se_hidden(ch, c.se_ratio));
        else if (stage.attention == StageAttention::tfwse)
          stage.excitation = ExcitationParams<T>(freq, tfwse_hidden(freq, c.tfwse_ratio));
        stages_.push_back(std::move(stage));
        stage_freqs_.push_back(freq);
        in_c = ch;
      }
      conv_output_extent(freq, 5, 1, 1, 0);  // head depthwise conv must fit
    } catch (const Error& e) {
      if (e.code() == Errc::invalid_config) throw;
      throw Error(Errc::invalid_config, e.what());
    }
    head_dw_weight_ = Tensor<T>::zeros(head_dw_spec().weight_shape()).set_requires_grad(true);
    head_pw_weight_ = Tensor<T>::zeros(head_pw_spec().weight_shape()).set_requires_grad(true);
    head_norm_ = NormState<T>(head_pw_spec().out_channels);
    classifier_weight_ = Tensor<T>::zeros(classifier_spec().weight_shape()).set_requires_grad(true);
    classifier_bias_ = Tensor<T>::zeros({c.num_classes}).set_requires_grad(true);
  }

  // He-uniform on fan-in for every weight; biases and beta stay 0, gamma 1.
  void initialize() {
    Rng rng(mix_seed(config_.seed, 0x1417));
    for_each_param([&](const std::string&, Tensor<T>& t, bool decayed) {
      if (!decayed) return;
      const std::size_t fan_in = t.rank() == 4 ? t.numel() / t.dim(0) : t.dim(0);
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
      for (T& v : t.mutable_data()) v = static_cast<T>(rng.uniform(-bound, bound));
    });
  }

  ModelConfig config_;
  Tensor<T> stem_weight_, stem_bias_;
  NormState<T> stem_norm_;
  std::vector<Stage> stages_;
  std::vector<std::size_t> stage_freqs_;
  Tensor<T> head_dw_weight_, head_pw_weight_;
  NormState<T> head_norm_;
  Tensor<T> classifier_weight_, classifier_bias_;
  std::uint64_t train_passes_ = 0;
};

template <typename T = float>
BcSeNet<T> build_model(const ModelConfig& config) {
  return BcSeNet<T>(config);
}

template <typename T>
std::size_t count_params(BcSeNet<T>& model) {
  return model.num_params();
}

// Parameter count implied by a config.
inline std::size_t count_params(const ModelConfig& config) {
  ModelConfig c = config;
  return BcSeNet<float>(c).num_params();
}

}  // namespace bcse

#endif  // BCSE_MODEL_HPP_
