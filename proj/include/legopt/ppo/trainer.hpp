#pragma once

#include <chrono>
#include <functional>
#include <vector>

#include "legopt/ppo/update.hpp"

namespace legopt::ppo {

struct TrainStats {
  int epoch = 0;
  double mean_return = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double entropy = 0.0;
  double clip_frac = 0.0;
  double seconds = 0.0;
  int episodes = 0;
  int failures = 0;
};

struct TrainOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  bool wall_clock = true;  // false: `seconds` stays 0 so output bytes are reproducible
};

using EpochCallback = std::function<void(const TrainStats&, const Agent&)>;

/// collect -> GAE -> PPO update, `epochs` times. Temporal-DR populations are
/// advanced with the training progress before each epoch.
inline std::vector<TrainStats> train(Agent& agent, sim::Population& pop, const PpoConfig& cfg,
                                     int epochs, const TrainOptions& opt = {},
                                     const EpochCallback& on_epoch = {}) {
  validate(cfg);
  Optimizers optim(agent, cfg);
  Rng rng(mix64(opt.seed ^ 0x7070'6f5f'7570'6474ULL));
  std::vector<double> running(pop.size(), 0.0);
  std::vector<TrainStats> out;
  out.reserve(static_cast<std::size_t>(std::max(0, epochs)));
  const auto t0 = std::chrono::steady_clock::now();
  double last_return = 0.0;
  RolloutOptions ro;
  ro.timeout_gamma = cfg.effective_gamma();
  ro.threads = opt.threads;

  for (int epoch = 0; epoch < epochs; ++epoch) {
    if (pop.mode() == sim::DrMode::kTemporal)
      pop.temporal_advance(static_cast<double>(epoch) / epochs);
    const RolloutBuffer buf =
        collect_rollout(agent, pop, static_cast<std::size_t>(cfg.rollout_length), running, ro);
    const UpdateBatch batch = prepare_batch(buf, cfg);
    const UpdateStats us = ppo_update(agent, optim, batch, cfg, rng);

    TrainStats s;
    s.epoch = epoch + 1;
    if (!buf.episode_returns.empty()) {
      double sum = 0.0;
      for (double r : buf.episode_returns) sum += r;
      last_return = sum / static_cast<double>(buf.episode_returns.size());
    }
    s.mean_return = last_return;
    s.actor_loss = us.actor_loss;
    s.critic_loss = us.critic_loss;
    s.entropy = us.entropy;
    s.clip_frac = us.clip_frac;
    s.episodes = static_cast<int>(buf.episode_returns.size());
    s.failures = buf.failures;
    if (opt.wall_clock)
      s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(s);
    if (on_epoch) on_epoch(s, agent);
  }
  return out;
}

/// Adapts a pretrained agent to one morphology: `n_envs` identical robots at
/// `xi` (friction / motor-strength randomization stays on) and fresh
/// optimizer state.
inline std::vector<TrainStats> finetune(Agent& agent, const ScalingFactors& xi,
                                        const PpoConfig& cfg, int steps,
                                        const sim::EnvSetup& setup, std::size_t n_envs,
                                        const TrainOptions& opt = {},
                                        const EpochCallback& on_epoch = {}) {
  if (steps <= 0) return {};
  sim::Population pop(n_envs, sim::DrMode::kNone, opt.seed, setup.task, setup.sim, setup.morph, xi);
  return train(agent, pop, cfg, steps, opt, on_epoch);
}

}  // namespace legopt::ppo
