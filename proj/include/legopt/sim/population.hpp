#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "legopt/morphology.hpp"
#include "legopt/sim/env.hpp"

namespace legopt::sim {

enum class DrMode { kSpatial, kTemporal, kNone };

inline const char* dr_name(DrMode m) {
  switch (m) {
    case DrMode::kSpatial: return "spatial";
    case DrMode::kTemporal: return "temporal";
    case DrMode::kNone: return "none";
  }
  return "?";
}

inline DrMode parse_dr(const std::string& s) {
  if (s == "spatial") return DrMode::kSpatial;
  if (s == "temporal") return DrMode::kTemporal;
  if (s == "none") return DrMode::kNone;
  throw ConfigError("unknown domain randomization mode '" + s +
                    "' (expected spatial, temporal or none)");
}

/// Inputs needed to turn scaling factors into robots.
struct MorphologyConfig {
  BaseRobotSpec base;
  FactorBounds bounds;
  PdCorrectionPoly poly;
  int temporal_levels = 3;  // schedule = morphology_grid(levels), 81 entries for 3
};

/// Task, simulator and morphology settings shared by every population.
struct EnvSetup {
  TaskSpec task;
  SimConfig sim;
  MorphologyConfig morph;
};

inline RobotModel make_robot(const MorphologyConfig& mc, const ScalingFactors& xi) {
  return build_robot(mc.base, xi, mc.poly, mc.base.gains, mc.bounds);
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Work is split into
/// contiguous blocks, so results never depend on the worker count as long as
/// fn(i) only touches element i.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t block = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * block, hi = std::min(n, lo + block);
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// N independent environments sharing one terrain. Each environment owns a
/// random stream reseeded at every reset from (master seed, env index,
/// reset count).
class Population {
 public:
  Population(std::size_t n, DrMode mode, std::uint64_t seed, const TaskSpec& task,
             const SimConfig& sim, const MorphologyConfig& morph,
             const ScalingFactors& fixed_xi = ScalingFactors::identity())
      : mode_(mode), seed_(seed), task_(task), sim_(sim), morph_(morph) {
    if (n < 1) throw ConfigError("population needs at least one environment");
    validate_task(task);
    terrain_ = std::make_shared<const Terrain>(make_terrain(task));
    validate_factors(fixed_xi, morph.bounds);
    const RobotModel reference = make_robot(morph, ScalingFactors::identity());
    if (task_.waypoints.empty()) task_.waypoints = default_waypoints(task_, nominal_height(reference, sim_));

    std::vector<ScalingFactors> xis(n, fixed_xi);
    if (mode == DrMode::kSpatial) {
      Rng morph_rng(mix64(seed ^ 0x6d6f7270686f6c6fULL));
      for (auto& xi : xis) xi = sample_factors(morph_rng, morph.bounds.lo, morph.bounds.hi);
    } else if (mode == DrMode::kTemporal) {
      schedule_ = morphology_grid(morph.temporal_levels, morph.bounds);
      std::fill(xis.begin(), xis.end(), schedule_.front());
    }
    envs_.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      envs_.emplace_back(make_robot(morph, xis[i]), terrain_, task_.waypoints, task_, sim_);
    rngs_.resize(n);
    resets_.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) reset(i);
  }

  std::size_t size() const { return envs_.size(); }
  DrMode mode() const { return mode_; }
  Env& env(std::size_t i) { return envs_[i]; }
  const Env& env(std::size_t i) const { return envs_[i]; }
  Rng& rng(std::size_t i) { return rngs_[i]; }
  const TaskSpec& task() const { return task_; }
  const SimConfig& sim_config() const { return sim_; }
  const Terrain& terrain() const { return *terrain_; }
  const std::vector<ScalingFactors>& schedule() const { return schedule_; }
  std::size_t schedule_index() const { return schedule_index_; }
  int rebuilds() const { return rebuilds_; }
  std::uint64_t reset_count(std::size_t i) const { return resets_[i]; }

  const Observation& reset(std::size_t i) {
    rngs_[i].seed(stream_seed(seed_, i, resets_[i]++));
    return envs_[i].reset(rngs_[i]);
  }

  /// Switches every environment to schedule[floor(progress * len)] once the
  /// progress crosses the next fraction of the run; each crossing counts as
  /// one rebuild.
  void temporal_advance(double progress) {
    if (mode_ != DrMode::kTemporal)
      throw UsageError("temporal_advance requires a temporal-mode population");
    const double len = static_cast<double>(schedule_.size());
    const auto target = std::min(schedule_.size() - 1,
                                 static_cast<std::size_t>(std::floor(std::clamp(progress, 0.0, 1.0) * len)));
    if (target <= schedule_index_) return;
    rebuilds_ += static_cast<int>(target - schedule_index_);
    schedule_index_ = target;
    const RobotModel m = make_robot(morph_, schedule_[target]);
    for (std::size_t i = 0; i < envs_.size(); ++i) {
      envs_[i].set_model(m);
      reset(i);
    }
  }

  static double nominal_height(const RobotModel& m, const SimConfig& cfg = {}) {
    BodyState b;
    for (std::size_t j = 0; j < kNumJoints; ++j) b.pos[3 + static_cast<int>(j)] = cfg.nominal_q[j];
    const Kinematics k = kinematics(m, b.pos, b.vel);
    return -std::min(k.point[0][1], k.point[1][1]);
  }

 private:
  DrMode mode_;
  std::uint64_t seed_;
  TaskSpec task_;
  SimConfig sim_;
  MorphologyConfig morph_;
  std::shared_ptr<const Terrain> terrain_;
  std::vector<Env> envs_;
  std::vector<Rng> rngs_;
  std::vector<std::uint64_t> resets_;
  std::vector<ScalingFactors> schedule_;
  std::size_t schedule_index_ = 0;
  int rebuilds_ = 0;
};

}  // namespace legopt::sim
