#pragma once

#include <vector>

#include "legopt/nn/gaussian_policy.hpp"
#include "legopt/ppo/config.hpp"
#include "legopt/ppo/normalizer.hpp"
#include "legopt/sim/env.hpp"

namespace legopt::ppo {

/// Asymmetric actor-critic: the actor sees [proprio, heights, history], the
/// critic additionally sees body velocity and the privileged parameters.
struct Agent {
  nn::GaussianPolicy policy;
  nn::Mlp critic;
  RunningNormalizer actor_norm;
  RunningNormalizer critic_norm;

  bool operator==(const Agent& o) const {
    return policy.mean == o.policy.mean && policy.log_std == o.policy.log_std &&
           critic == o.critic && actor_norm == o.actor_norm && critic_norm == o.critic_norm;
  }
};

inline std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> s{in};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(out);
  return s;
}

inline Agent make_agent(const PpoConfig& cfg, Rng& rng) {
  const auto act = nn::parse_activation(cfg.activation);
  Agent a;
  nn::Mlp mean(layer_sizes(static_cast<int>(sim::kActorDim), cfg.actor_hidden,
                           static_cast<int>(sim::kActionDim)),
               act);
  mean.init(rng, 0.01);
  a.policy = nn::GaussianPolicy(std::move(mean), cfg.init_log_std);
  a.critic = nn::Mlp(layer_sizes(static_cast<int>(sim::kCriticDim), cfg.critic_hidden, 1), act);
  a.critic.init(rng, 1.0);
  a.actor_norm = RunningNormalizer(static_cast<int>(sim::kActorDim), cfg.obs_clip);
  a.critic_norm = RunningNormalizer(static_cast<int>(sim::kCriticDim), cfg.obs_clip);
  return a;
}

}  // namespace legopt::ppo
