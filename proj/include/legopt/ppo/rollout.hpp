#pragma once

#include <vector>

#include "legopt/ppo/agent.hpp"
#include "legopt/sim/population.hpp"

namespace legopt::ppo {

/// Transitions of `steps` policy steps over `envs` environments, stored
/// step-major (column t * envs + e). Observation columns are already
/// normalized with the statistics in force when they were collected.
struct RolloutBuffer {
  std::size_t envs = 0;
  std::size_t steps = 0;
  nn::Matrix actor_obs;
  nn::Matrix critic_obs;
  nn::Matrix actions;
  std::vector<double> rewards;      // env reward plus timeout bootstrap
  std::vector<double> env_rewards;  // env reward only
  std::vector<unsigned char> dones;
  std::vector<double> values;
  std::vector<double> log_probs;
  std::vector<double> bootstrap;
  std::vector<double> episode_returns;  // non-discounted, in completion order
  int failures = 0;

  std::size_t size() const { return envs * steps; }
};

struct RolloutOptions {
  bool deterministic = false;     // act with the mean action
  bool update_normalizers = true;
  double timeout_gamma = 0.99;    // discount for bootstrapping timed-out episodes
  int threads = 1;
};

namespace detail {

inline void gather_inputs(sim::Population& pop, nn::Matrix& actor_in, nn::Matrix& critic_in) {
  const auto n = static_cast<Eigen::Index>(pop.size());
  actor_in.resize(static_cast<Eigen::Index>(sim::kActorDim), n);
  critic_in.resize(static_cast<Eigen::Index>(sim::kCriticDim), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& obs = pop.env(static_cast<std::size_t>(i)).observation();
    obs.actor_input(actor_in.col(i).data());
    obs.critic_input(critic_in.col(i).data());
  }
}

}  // namespace detail

/// Steps every environment `steps` times with actions sampled from the
/// policy. Environments that finish are reset immediately; their running
/// non-discounted return is appended to episode_returns.
/// `running_returns` carries partial episode returns across calls.
inline RolloutBuffer collect_rollout(Agent& agent, sim::Population& pop, std::size_t steps,
                                     std::vector<double>& running_returns,
                                     const RolloutOptions& opt = {}) {
  const std::size_t n = pop.size();
  running_returns.resize(n, 0.0);
  RolloutBuffer buf;
  buf.envs = n;
  buf.steps = steps;
  const auto total = static_cast<Eigen::Index>(n * steps);
  buf.actor_obs.resize(static_cast<Eigen::Index>(sim::kActorDim), total);
  buf.critic_obs.resize(static_cast<Eigen::Index>(sim::kCriticDim), total);
  buf.actions.resize(static_cast<Eigen::Index>(sim::kActionDim), total);
  buf.rewards.assign(n * steps, 0.0);
  buf.env_rewards.assign(n * steps, 0.0);
  buf.dones.assign(n * steps, 0);
  buf.values.assign(n * steps, 0.0);
  buf.log_probs.assign(n * steps, 0.0);

  nn::Matrix actor_in, critic_in;
  const nn::Vector std_dev = agent.policy.log_std.array().exp();
  std::vector<sim::Observation> final_obs(n);
  std::vector<unsigned char> timed_out(n);

  for (std::size_t t = 0; t < steps; ++t) {
    detail::gather_inputs(pop, actor_in, critic_in);
    if (opt.update_normalizers) {
      agent.actor_norm.update(actor_in);
      agent.critic_norm.update(critic_in);
    }
    const nn::Matrix a_in = agent.actor_norm.apply(actor_in);
    const nn::Matrix c_in = agent.critic_norm.apply(critic_in);
    const nn::Matrix mu = agent.policy.mean.forward(a_in);
    const nn::Matrix v = agent.critic.forward(c_in);
    const auto col0 = static_cast<Eigen::Index>(t * n);
    buf.actor_obs.middleCols(col0, static_cast<Eigen::Index>(n)) = a_in;
    buf.critic_obs.middleCols(col0, static_cast<Eigen::Index>(n)) = c_in;

    nn::Matrix act = mu;
    if (!opt.deterministic)
      for (std::size_t i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < act.rows(); ++k)
          act(k, static_cast<Eigen::Index>(i)) += std_dev[k] * normal01(pop.rng(i));
    buf.actions.middleCols(col0, static_cast<Eigen::Index>(n)) = act;
    const nn::Vector logp = agent.policy.log_prob_from_mean(mu, act);
    for (std::size_t i = 0; i < n; ++i) {
      buf.values[t * n + i] = v(0, static_cast<Eigen::Index>(i));
      buf.log_probs[t * n + i] = logp[static_cast<Eigen::Index>(i)];
    }

    sim::parallel_for(n, opt.threads, [&](std::size_t i) {
      sim::Joints a{};
      for (std::size_t k = 0; k < sim::kActionDim; ++k)
        a[k] = act(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
      auto& env = pop.env(i);
      const auto res = env.step(a);
      buf.env_rewards[t * n + i] = res.reward.total;
      buf.rewards[t * n + i] = res.reward.total;
      buf.dones[t * n + i] = res.done ? 1 : 0;
      timed_out[i] = env.timed_out() ? 1 : 0;
      if (res.done) {
        final_obs[i] = env.observation();
        pop.reset(i);
      }
    });

    // Fixed-order bookkeeping keeps results independent of the worker count.
    std::vector<std::size_t> timeouts;
    for (std::size_t i = 0; i < n; ++i) {
      running_returns[i] += buf.env_rewards[t * n + i];
      if (buf.dones[t * n + i]) {
        buf.episode_returns.push_back(running_returns[i]);
        running_returns[i] = 0.0;
        if (timed_out[i])
          timeouts.push_back(i);
        else
          ++buf.failures;
      }
    }
    if (!timeouts.empty()) {
      nn::Matrix fin(static_cast<Eigen::Index>(sim::kCriticDim),
                     static_cast<Eigen::Index>(timeouts.size()));
      for (std::size_t k = 0; k < timeouts.size(); ++k)
        final_obs[timeouts[k]].critic_input(fin.col(static_cast<Eigen::Index>(k)).data());
      const nn::Matrix fv = agent.critic.forward(agent.critic_norm.apply(fin));
      for (std::size_t k = 0; k < timeouts.size(); ++k)
        buf.rewards[t * n + timeouts[k]] += opt.timeout_gamma * fv(0, static_cast<Eigen::Index>(k));
    }
  }

  detail::gather_inputs(pop, actor_in, critic_in);
  const nn::Matrix bv = agent.critic.forward(agent.critic_norm.apply(critic_in));
  buf.bootstrap.assign(bv.data(), bv.data() + bv.size());
  return buf;
}

}  // namespace legopt::ppo
