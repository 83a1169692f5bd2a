#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "legopt/ppo/agent.hpp"
#include "legopt/sim/population.hpp"

namespace legopt::codesign {

struct FitnessReport {
  double f = 0.0;                 // mean non-discounted return
  std::vector<double> returns;    // per environment
  std::vector<int> lengths;       // policy steps survived
  double success_fraction = 0.0;  // hind foot made it past the obstacle
  double divergence_fraction = 0.0;
  double failure_fraction = 0.0;  // any early termination, divergence included
  double mean_length = 0.0;
};

struct FitnessOptions {
  std::size_t n_envs = 16;
  int steps = 250;
  std::uint64_t seed = 0;
  int threads = 1;
  double reward_scale = 1.0;  // multiplies every per-step reward
};

/// One row per step of environment 0, written while an evaluation runs.
struct TraceRow {
  int step = 0;
  sim::BodyState body;
  sim::RewardBreakdown reward;
};
using TraceSink = std::function<void(const TraceRow&)>;

inline double obstacle_far_side(const sim::TaskSpec& t) {
  return t.kind == sim::TaskKind::kLongJump ? t.obstacle_x + t.obstacle : t.obstacle_x;
}

/// N identical robots at `xi`, one episode each under the mean action; the
/// fitness is the average undiscounted return.
inline FitnessReport evaluate_fitness(const ppo::Agent& agent, const ScalingFactors& xi,
                                      const sim::EnvSetup& setup, const FitnessOptions& opt,
                                      const TraceSink& trace = {}) {
  if (opt.n_envs < 1) throw ConfigError("fitness evaluation needs at least one environment");
  if (opt.steps < 1) throw ConfigError("fitness evaluation needs at least one step");
  sim::TaskSpec task = setup.task;
  task.episode_steps = opt.steps;
  sim::Population pop(opt.n_envs, sim::DrMode::kNone, opt.seed, task, setup.sim, setup.morph, xi);
  const std::size_t n = pop.size();
  const double far_side = obstacle_far_side(task);

  FitnessReport rep;
  rep.returns.assign(n, 0.0);
  rep.lengths.assign(n, 0);
  std::vector<unsigned char> alive(n, 1), crossed(n, 0);
  std::vector<std::size_t> active;
  nn::Matrix in;
  int diverged = 0, failed = 0;

  for (int t = 0; t < opt.steps; ++t) {
    active.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (alive[i]) active.push_back(i);
    if (active.empty()) break;
    in.resize(static_cast<Eigen::Index>(sim::kActorDim), static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k)
      pop.env(active[k]).observation().actor_input(in.col(static_cast<Eigen::Index>(k)).data());
    const nn::Matrix mu = agent.policy.mean.forward(agent.actor_norm.apply(in));

    sim::parallel_for(active.size(), opt.threads, [&](std::size_t k) {
      const std::size_t i = active[k];
      sim::Joints a{};
      for (std::size_t j = 0; j < sim::kActionDim; ++j)
        a[j] = mu(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
      auto& env = pop.env(i);
      const auto res = env.step(a);
      rep.returns[i] += opt.reward_scale * res.reward.total;
      rep.lengths[i] = env.state().step;
      const auto& b = env.state().body;
      if (std::min(b.foot_pos[0][0], b.foot_pos[1][0]) > far_side) crossed[i] = 1;
      if (res.done) alive[i] = 0;
    });

    if (trace && rep.lengths[0] == t + 1) {  // env 0 stepped this round
      const auto& env = pop.env(0);
      trace({t + 1, env.state().body, env.last_reward()});
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& env = pop.env(i);
    if (env.failed()) ++failed;
    if (env.state().body.diverged) ++diverged;
  }
  double sum = 0.0, len = 0.0, succ = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += rep.returns[i];
    len += rep.lengths[i];
    // Falling into the gap after crossing it does not count.
    if (crossed[i] && !(pop.env(i).failed())) succ += 1.0;
  }
  const double dn = static_cast<double>(n);
  rep.f = sum / dn;
  rep.mean_length = len / dn;
  rep.success_fraction = succ / dn;
  rep.divergence_fraction = diverged / dn;
  rep.failure_fraction = failed / dn;
  return rep;
}

}  // namespace legopt::codesign
