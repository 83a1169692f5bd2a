#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "legopt/common.hpp"

namespace legopt::ppo {

/// Advantages and value targets for a (steps x envs) batch stored step-major
/// (index t * envs + e). done[t] marks that the episode ended after step t;
/// values beyond the batch come from `bootstrap`.
///
///   delta_t = r_t + gamma (1 - done_t) V(s_{t+1}) - V(s_t)
///   A_t     = delta_t + gamma lambda (1 - done_t) A_{t+1}
///   target  = A_t + V(s_t)
struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> targets;
};

inline GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                             std::span<const unsigned char> dones,
                             std::span<const double> bootstrap, std::size_t envs, double gamma,
                             double lambda) {
  if (envs == 0 || rewards.size() % envs != 0 || values.size() != rewards.size() ||
      dones.size() != rewards.size() || bootstrap.size() != envs)
    throw UsageError("compute_gae: inconsistent buffer shapes");
  const std::size_t steps = rewards.size() / envs;
  GaeResult out{std::vector<double>(rewards.size()), std::vector<double>(rewards.size())};
  for (std::size_t e = 0; e < envs; ++e) {
    double next_adv = 0.0;
    double next_value = bootstrap[e];
    for (std::size_t t = steps; t-- > 0;) {
      const std::size_t i = t * envs + e;
      const double live = dones[i] ? 0.0 : 1.0;
      const double delta = rewards[i] + gamma * live * next_value - values[i];
      next_adv = delta + gamma * lambda * live * next_adv;
      out.advantages[i] = next_adv;
      out.targets[i] = next_adv + values[i];
      next_value = values[i];
    }
  }
  return out;
}

/// In-place (x - mean) / std over the whole batch.
inline void normalize_advantages(std::vector<double>& a) {
  if (a.empty()) return;
  double mean = 0.0;
  for (double v : a) mean += v;
  mean /= static_cast<double>(a.size());
  double var = 0.0;
  for (double v : a) var += (v - mean) * (v - mean);
  var /= static_cast<double>(a.size());
  const double sd = std::sqrt(var) + 1e-12;
  for (double& v : a) v = (v - mean) / sd;
}

}  // namespace legopt::ppo
