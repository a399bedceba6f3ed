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

// Builds a small model, runs a few optimizer steps on two synthetic tone
// classes and prints the predictions for a fresh clip of each class.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "bcse/bcse.hpp"

namespace {

bcse::AudioClip tone(double hz, std::uint64_t seed) {
  bcse::Rng rng(seed);
  bcse::AudioClip clip;
  clip.samples.resize(bcse::kSampleRate);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    const double t = static_cast<double>(i) / bcse::kSampleRate;
    clip.samples[i] = static_cast<float>(0.3 * std::sin(2.0 * std::numbers::pi * hz * t + phase) + 0.01 * rng.normal());
  }
  return clip;
}

}  // namespace

int main() {
  bcse::ModelConfig cfg;
  cfg.tau = 1.0;
  cfg.num_classes = 2;
  cfg.labels = {"low", "high"};
  cfg.dropout = 0.0;
  bcse::BcSeNet<float> model(cfg);
  std::printf("BC-SENet-1, %zu parameters\n", model.num_params());

  std::vector<bcse::FeatureMap> maps;
  std::vector<int> labels;
  for (int i = 0; i < 8; ++i) {
    maps.push_back(bcse::log_mel(tone(i % 2 ? 2500.0 : 400.0, 100 + i)));
    labels.push_back(i % 2);
  }
  const auto x = bcse::stack_features<float>(maps);

  bcse::OptimConfig oc = bcse::OptimConfig::adam50();
  auto params = model.parameters();
  bcse::OptimizerState<float> state;
  state.kind = oc.kind;
  for (std::size_t step = 0; step < 10; ++step) {
    const auto r = bcse::train_step(model, x, labels, params, state, oc.lr_peak, oc, step);
    std::printf("step %zu loss %.4f\n", step + 1, r.loss);
  }

  for (int k = 0; k < 2; ++k) {
    bcse::NoGradScope<float> no_grad;
    const auto logits = model.forward(bcse::log_mel(tone(k ? 2500.0 : 400.0, 999)).to_tensor<float>(), bcse::Mode::eval);
    const auto p = bcse::softmax_rows(logits);
    std::printf("%s tone -> low %.3f high %.3f\n", k ? "high" : "low", p[0], p[1]);
  }
  return 0;
}
