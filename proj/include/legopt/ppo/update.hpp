#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <span>
#include <vector>

#include "legopt/nn/adam.hpp"
#include "legopt/ppo/agent.hpp"
#include "legopt/ppo/gae.hpp"
#include "legopt/ppo/rollout.hpp"

namespace legopt::ppo {

struct Optimizers {
  nn::AdamState actor;
  nn::AdamState log_std;
  nn::AdamState critic;

  Optimizers() = default;
  Optimizers(const Agent& a, const PpoConfig& cfg)
      : actor(a.policy.mean.params().size(), cfg.lr_actor),
        log_std(static_cast<std::size_t>(a.policy.log_std.size()), cfg.lr_actor),
        critic(a.critic.params().size(), cfg.lr_critic) {}
};

struct UpdateStats {
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double entropy = 0.0;
  double clip_frac = 0.0;
};

/// Batch quantities ppo_update consumes once GAE has run.
struct UpdateBatch {
  const nn::Matrix* actor_obs;
  const nn::Matrix* critic_obs;
  const nn::Matrix* actions;
  std::vector<double> old_log_probs;
  std::vector<double> advantages;  // normalized
  std::vector<double> targets;
};

inline UpdateBatch prepare_batch(const RolloutBuffer& buf, const PpoConfig& cfg) {
  auto gae = compute_gae(buf.rewards, buf.values, buf.dones, buf.bootstrap, buf.envs,
                         cfg.effective_gamma(), cfg.lambda);
  normalize_advantages(gae.advantages);
  return {&buf.actor_obs, &buf.critic_obs, &buf.actions, buf.log_probs,
          std::move(gae.advantages), std::move(gae.targets)};
}

namespace detail {

inline double clip_grad_norm(std::span<double> g, std::vector<double>* g2, double max_norm) {
  double sq = 0.0;
  for (double v : g) sq += v * v;
  if (g2)
    for (double v : *g2) sq += v * v;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / (norm + 1e-12);
    for (double& v : g) v *= s;
    if (g2)
      for (double& v : *g2) v *= s;
  }
  return norm;
}

inline nn::Matrix gather_cols(const nn::Matrix& m, const std::vector<std::size_t>& idx,
                              std::size_t lo, std::size_t hi) {
  nn::Matrix out(m.rows(), static_cast<Eigen::Index>(hi - lo));
  for (std::size_t k = lo; k < hi; ++k)
    out.col(static_cast<Eigen::Index>(k - lo)) = m.col(static_cast<Eigen::Index>(idx[k]));
  return out;
}

}  // namespace detail

/// Clipped-surrogate PPO epochs over shuffled minibatches. The critic
/// minimizes value_coef * 1/2 (V - target)^2, plus beta V^2 in a_reg mode.
inline UpdateStats ppo_update(Agent& agent, Optimizers& opt, const UpdateBatch& batch,
                              const PpoConfig& cfg, Rng& rng) {
  const std::size_t total = batch.advantages.size();
  UpdateStats stats;
  if (total == 0) return stats;
  const std::size_t n_mb = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(total) / cfg.minibatch_size)));
  const double beta = cfg.reg_mode == RegMode::kActivation ? cfg.activation_beta : 0.0;
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), 0);

  nn::ParamVector g_actor(agent.policy.mean.params().size());
  std::vector<double> g_logstd(static_cast<std::size_t>(agent.policy.log_std.size()));
  nn::ParamVector g_critic(agent.critic.params().size());
  nn::Mlp::Cache actor_cache, critic_cache;
  int count = 0;

  for (int epoch = 0; epoch < cfg.update_epochs; ++epoch) {
    for (std::size_t i = total; i > 1; --i) std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
    for (std::size_t mb = 0; mb < n_mb; ++mb) {
      const std::size_t lo = mb * total / n_mb, hi = (mb + 1) * total / n_mb;
      const auto B = static_cast<Eigen::Index>(hi - lo);
      const double inv_b = 1.0 / static_cast<double>(B);
      const nn::Matrix a_obs = detail::gather_cols(*batch.actor_obs, idx, lo, hi);
      const nn::Matrix c_obs = detail::gather_cols(*batch.critic_obs, idx, lo, hi);
      const nn::Matrix acts = detail::gather_cols(*batch.actions, idx, lo, hi);

      // Actor.
      const nn::Matrix mu = agent.policy.mean.forward(a_obs, actor_cache);
      const nn::Vector logp = agent.policy.log_prob_from_mean(mu, acts);
      const nn::Vector inv_var = (-2.0 * agent.policy.log_std).array().exp();
      nn::Matrix d_mu(mu.rows(), B);
      std::fill(g_logstd.begin(), g_logstd.end(), 0.0);
      double surrogate = 0.0, clipped = 0.0;
      for (Eigen::Index c = 0; c < B; ++c) {
        const double A = batch.advantages[idx[lo + static_cast<std::size_t>(c)]];
        const double old = batch.old_log_probs[idx[lo + static_cast<std::size_t>(c)]];
        const double ratio = std::exp(logp[c] - old);
        const double rc = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
        const bool unclipped = ratio * A <= rc * A;
        surrogate += std::min(ratio * A, rc * A);
        if (std::abs(ratio - 1.0) > cfg.clip) clipped += 1.0;
        // d(-surrogate)/d logp, averaged over the minibatch.
        const double dlogp = unclipped ? -A * ratio * inv_b : 0.0;
        const nn::Vector diff = acts.col(c) - mu.col(c);
        d_mu.col(c) = dlogp * diff.cwiseProduct(inv_var);
        for (Eigen::Index k = 0; k < diff.size(); ++k)
          g_logstd[static_cast<std::size_t>(k)] += dlogp * (diff[k] * diff[k] * inv_var[k] - 1.0);
      }
      const double entropy = agent.policy.entropy();
      for (double& g : g_logstd) g -= cfg.entropy_coef;
      const double actor_loss = -surrogate * inv_b - cfg.entropy_coef * entropy;

      // Critic.
      const nn::Matrix v = agent.critic.forward(c_obs, critic_cache);
      nn::Matrix d_v(1, B);
      double critic_loss = 0.0;
      for (Eigen::Index c = 0; c < B; ++c) {
        const double target = batch.targets[idx[lo + static_cast<std::size_t>(c)]];
        const double err = v(0, c) - target;
        critic_loss += cfg.value_coef * 0.5 * err * err + beta * v(0, c) * v(0, c);
        d_v(0, c) = (cfg.value_coef * err + 2.0 * beta * v(0, c)) * inv_b;
      }
      critic_loss *= inv_b;

      if (!std::isfinite(actor_loss) || !std::isfinite(critic_loss))
        throw NumericError("non-finite PPO loss at update epoch " + std::to_string(epoch) +
                           ", minibatch " + std::to_string(mb));

      std::fill(g_actor.begin(), g_actor.end(), 0.0);
      agent.policy.mean.backward(actor_cache, d_mu, g_actor);
      detail::clip_grad_norm(g_actor, &g_logstd, cfg.max_grad_norm);
      nn::adam_step(opt.actor, agent.policy.mean.params(), g_actor);
      nn::adam_step(opt.log_std, {agent.policy.log_std.data(), g_logstd.size()}, g_logstd);

      std::fill(g_critic.begin(), g_critic.end(), 0.0);
      agent.critic.backward(critic_cache, d_v, g_critic);
      detail::clip_grad_norm(g_critic, nullptr, cfg.max_grad_norm);
      nn::adam_step(opt.critic, agent.critic.params(), g_critic);

      stats.actor_loss += actor_loss;
      stats.critic_loss += critic_loss;
      stats.entropy += entropy;
      stats.clip_frac += clipped * inv_b;
      ++count;
    }
  }
  stats.actor_loss /= count;
  stats.critic_loss /= count;
  stats.entropy /= count;
  stats.clip_frac /= count;
  return stats;
}

}  // namespace legopt::ppo
