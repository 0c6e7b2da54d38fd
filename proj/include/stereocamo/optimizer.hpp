/*
Copyright 2026 The stereocamo Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "stereocamo/eot.hpp"
#include "stereocamo/pipeline.hpp"

namespace stereocamo {

struct OptimConfig {
  int epochs = 100;
  double initial_lr = 0.01;
  double min_lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

// Cosine decay from initial_lr at epoch 0 to min_lr at the last epoch.
double cosine_lr(const OptimConfig& cfg, int epoch);

// Adaptive-moment update with bias correction.
class Adam {
 public:
  Adam(std::size_t size, double beta1, double beta2, double epsilon);

  void step(std::span<double> params, std::span<const double> grad, double lr);
  long steps() const { return t_; }

 private:
  double beta1_, beta2_, epsilon_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  double lr = 0.0;
};

struct OptimizeResult {
  Texture texture;
  std::vector<EpochRecord> history;
};

// Called after each epoch with the current texture.
using EpochCallback = std::function<void(const EpochRecord&, const Texture&)>;

// Per step: draw EoT samples, render both eyes, match, evaluate the objective,
// backpropagate to the texture, take an Adam step and clamp to [0,1]. Every
// epoch visits each scene once in order.
OptimizeResult optimize_texture(const std::vector<AttackScene>& scenes, const Texture& init,
                                const AttackSettings& settings, const EoTConfig& eot,
                                const OptimConfig& optim, const EpochCallback& on_epoch = {});

}  // namespace stereocamo
