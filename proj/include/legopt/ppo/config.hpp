#pragma once

#include <string>
#include <vector>

#include "legopt/common.hpp"

namespace legopt::ppo {

enum class RegMode { kNormal, kDiscount, kActivation };

inline const char* reg_name(RegMode m) {
  switch (m) {
    case RegMode::kNormal: return "normal";
    case RegMode::kDiscount: return "d_reg";
    case RegMode::kActivation: return "a_reg";
  }
  return "?";
}

inline RegMode parse_reg(const std::string& s) {
  if (s == "normal") return RegMode::kNormal;
  if (s == "d_reg") return RegMode::kDiscount;
  if (s == "a_reg") return RegMode::kActivation;
  throw ConfigError("unknown regularization mode '" + s + "' (expected normal, d_reg or a_reg)");
}

struct PpoConfig {
  double gamma = 0.99;
  double gamma_reg = 0.97;
  double lambda = 0.95;
  double clip = 0.2;
  int update_epochs = 4;
  int minibatch_size = 4096;
  double lr_actor = 3e-4;
  double lr_critic = 1e-3;
  double entropy_coef = 5e-3;
  double value_coef = 1.0;
  double activation_beta = 1e-3;  // a_reg penalty on V(s)^2
  double max_grad_norm = 1.0;
  RegMode reg_mode = RegMode::kDiscount;
  int rollout_length = 24;
  int epochs = 300;
  std::vector<int> actor_hidden{128, 128, 128};
  std::vector<int> critic_hidden{256, 256, 256};
  std::string activation = "tanh";
  double init_log_std = -1.0;
  double obs_clip = 5.0;
  int checkpoint_every = 0;  // 0 = only the final checkpoint

  /// Discount used for advantages and value targets.
  double effective_gamma() const { return reg_mode == RegMode::kDiscount ? gamma_reg : gamma; }
};

inline void validate(const PpoConfig& c) {
  if (!(c.gamma > 0.0 && c.gamma < 1.0)) throw ConfigError("ppo.gamma must lie in (0, 1)");
  if (!(c.gamma_reg > 0.0 && c.gamma_reg <= c.gamma))
    throw ConfigError("ppo.gamma_reg must satisfy 0 < gamma_reg <= gamma");
  if (!(c.lambda >= 0.0 && c.lambda <= 1.0)) throw ConfigError("ppo.lambda must lie in [0, 1]");
  if (!(c.clip > 0.0)) throw ConfigError("ppo.clip must be > 0");
  if (c.update_epochs < 1 || c.minibatch_size < 1 || c.rollout_length < 1)
    throw ConfigError("ppo.update_epochs, minibatch_size and rollout_length must be >= 1");
  if (c.epochs < 0) throw ConfigError("ppo.epochs must be >= 0");
  if (!(c.lr_actor > 0.0) || !(c.lr_critic > 0.0))
    throw ConfigError("ppo learning rates must be > 0");
  if (c.actor_hidden.empty() || c.critic_hidden.empty())
    throw ConfigError("ppo networks need at least one hidden layer");
}

}  // namespace legopt::ppo
