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

#include "stereocamo/optimizer.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "stereocamo/errors.hpp"

namespace stereocamo {

void OptimConfig::validate() const {
  require(epochs >= 1, "epochs must be at least 1");
  require(initial_lr >= 0.0 && min_lr >= 0.0, "learning rates must be non-negative");
  require(min_lr <= initial_lr, "min_lr must not exceed initial_lr");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "Adam betas must lie in [0,1)");
  require(epsilon > 0.0, "Adam epsilon must be positive");
}

double cosine_lr(const OptimConfig& cfg, int epoch) {
  if (cfg.epochs <= 1) return cfg.initial_lr;
  if (epoch >= cfg.epochs - 1) return cfg.min_lr;
  const double t = static_cast<double>(epoch) / (cfg.epochs - 1);
  return cfg.min_lr + 0.5 * (cfg.initial_lr - cfg.min_lr) * (1.0 + std::cos(std::numbers::pi * t));
}

Adam::Adam(std::size_t size, double beta1, double beta2, double epsilon)
    : beta1_(beta1), beta2_(beta2), epsilon_(epsilon), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad, double lr) {
  require(params.size() == m_.size() && grad.size() == m_.size(), "Adam: size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * grad[k];
    v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * grad[k] * grad[k];
    params[k] -= lr * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + epsilon_);
  }
}

OptimizeResult optimize_texture(const std::vector<AttackScene>& scenes, const Texture& init,
                                const AttackSettings& settings, const EoTConfig& eot,
                                const OptimConfig& optim, const EpochCallback& on_epoch) {
  require(!scenes.empty(), "optimize_texture: at least one scene is required");
  optim.validate();
  eot.validate();
  settings.weights.validate();

  OptimizeResult result{init, {}};
  Texture& texture = result.texture;
  texture.clamp();
  Adam adam(texture.values().size(), optim.beta1, optim.beta2, optim.epsilon);
  Rng rng(optim.seed);
  long step = 0;

  for (int epoch = 0; epoch < optim.epochs; ++epoch) {
    const double lr = cosine_lr(optim, epoch);
    double epoch_loss = 0.0;
    for (const AttackScene& scene : scenes) {
      Image grad(texture.height(), texture.width(), 3, 0.0);
      double loss = 0.0;
      for (int s = 0; s < eot.samples_per_step; ++s) {
        const EoTSample env = sample_eot(rng, eot, scene.scene().lighting);
        const TotalLoss l = attack_loss(scene, texture, env, settings);
        loss += l.value;
        const auto src = l.grad.values();
        auto dst = grad.values();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
      }
      const double inv = 1.0 / eot.samples_per_step;
      loss *= inv;
      for (auto& g : grad.values()) g *= inv;

      bool finite = std::isfinite(loss);
      for (double g : grad.values()) finite = finite && std::isfinite(g);
      if (!finite) {
        throw NumericalError("non-finite loss or gradient at step " + std::to_string(step) +
                             " (epoch " + std::to_string(epoch) + ", scene " + scene.scene().id + ")");
      }
      adam.step(texture.values(), grad.values(), lr);
      texture.clamp();
      epoch_loss += loss;
      ++step;
    }
    EpochRecord rec{epoch, epoch_loss / static_cast<double>(scenes.size()), lr};
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec, texture);
  }
  return result;
}

}  // namespace stereocamo
