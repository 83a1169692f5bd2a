#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <memory>
#include <vector>

#include "legopt/morphology.hpp"
#include "legopt/sim/dynamics.hpp"
#include "legopt/sim/terrain.hpp"

namespace legopt::sim {

/// Weights of the reward elements. Yaw tracking and hip position have no
/// sagittal-plane counterpart; their weights are kept for schema fidelity
/// and never enter the total.
struct RewardWeights {
  double goal_tracking = 1.5;
  double clearance = -1.0;
  double yaw_tracking = 0.0;
  double lin_vel_z = -1.0;
  double pitch_rate = -0.05;
  double action_rate = -0.1;
  double hip_position = 0.0;
  double joint_accel = -2.5e-7;
  double joint_cosmetic = -0.04;
  double torque_change = -1e-7;
  double torque_penalty = -1e-5;
  double orientation = -1.0;
};

struct RewardBreakdown {
  double goal_tracking = 0.0;
  double clearance = 0.0;  // sum of c_i M[p_i] >= 0; the negative weight makes it a penalty
  double lin_vel_z = 0.0;
  double pitch_rate = 0.0;
  double action_rate = 0.0;
  double joint_accel = 0.0;
  double joint_cosmetic = 0.0;
  double torque_change = 0.0;
  double torque_penalty = 0.0;
  double orientation = 0.0;
  double total = 0.0;

  static constexpr std::array<const char*, 10> kNames{
      "goal_tracking", "clearance",      "lin_vel_z",     "pitch_rate",     "action_rate",
      "joint_accel",   "joint_cosmetic", "torque_change", "torque_penalty", "orientation"};

  std::array<double, 10> terms() const {
    return {goal_tracking, clearance,      lin_vel_z,     pitch_rate,     action_rate,
            joint_accel,   joint_cosmetic, torque_change, torque_penalty, orientation};
  }
};

inline std::array<double, 10> weight_vector(const RewardWeights& w) {
  return {w.goal_tracking, w.clearance,      w.lin_vel_z,     w.pitch_rate,     w.action_rate,
          w.joint_accel,   w.joint_cosmetic, w.torque_change, w.torque_penalty, w.orientation};
}

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Range&) const = default;
};

struct SimConfig {
  PhysicsParams physics;
  RewardWeights weights;
  double policy_dt = 0.02;  // 50 Hz
  int pd_per_policy = 4;    // 200 Hz PD loop
  double torque_limit = 33.5;
  double action_scale = 0.5;
  double action_clip = 3.0;
  Joints nominal_q{0.7, -1.4, 0.7, -1.4};
  double joint_noise = 0.05;
  double pitch_noise = 0.05;
  double spawn_clearance = 0.005;
  Range friction{0.5, 1.25};
  Range motor_strength{0.9, 1.1};
  Range com_offset{-0.02, 0.02};
  double capture_radius = 0.1;
  double pitch_limit = 1.0;
  double fall_depth = 0.25;  // body this far below the start ground level ends the episode
  double edge_margin = 0.05;
  double height_clip = 1.0;
};

// pitch, pitch rate, q (4), qd (4), previous action (4), foot contacts (2)
inline constexpr std::size_t kProprioDim = 16;
inline constexpr std::size_t kExplicitDim = 2;
inline constexpr std::size_t kPrivilegedDim = 8;
inline constexpr std::size_t kHeightDim = 11;
inline constexpr std::size_t kHistoryLen = 5;
inline constexpr std::size_t kHistoryDim = kHistoryLen * kProprioDim;
inline constexpr std::size_t kActorDim = kProprioDim + kHeightDim + kHistoryDim;
inline constexpr std::size_t kCriticDim = kActorDim + kExplicitDim + kPrivilegedDim;
inline constexpr std::size_t kActionDim = kNumJoints;

using Proprio = std::array<double, kProprioDim>;

struct Observation {
  Proprio proprio{};
  std::array<double, kExplicitDim> explicit_privileged{};
  std::array<double, kPrivilegedDim> privileged{};
  std::array<double, kHeightDim> heights{};
  std::array<Proprio, kHistoryLen> history{};  // oldest first: frames t-5 .. t-1

  /// [proprio, heights, history]
  void actor_input(double* out) const {
    out = std::copy(proprio.begin(), proprio.end(), out);
    out = std::copy(heights.begin(), heights.end(), out);
    for (const auto& f : history) out = std::copy(f.begin(), f.end(), out);
  }
  /// [actor input, explicit privileged, privileged]
  void critic_input(double* out) const {
    actor_input(out);
    out += kActorDim;
    out = std::copy(explicit_privileged.begin(), explicit_privileged.end(), out);
    std::copy(privileged.begin(), privileged.end(), out);
  }
  bool operator==(const Observation&) const = default;
};

struct EnvState {
  BodyState body;
  Joints tau{};
  Joints prev_tau{};
  Joints action{};
  Joints prev_action{};
  std::array<bool, kNumLegs> contact{};
  std::size_t waypoint = 0;
  int step = 0;
};

inline Joints pd_torque(const PdGains& g, const Joints& q_des, const Joints& q, const Joints& qd,
                        double motor_strength, double torque_limit) {
  Joints tau{};
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    const double t = motor_strength * (g.kp[j] * (q_des[j] - q[j]) - g.kd[j] * qd[j]);
    tau[j] = std::clamp(t, -torque_limit, torque_limit);
  }
  return tau;
}

/// Unit vector from the body towards the waypoint; zero when they coincide.
inline Vec2 goal_direction(const Vec2& waypoint, const Vec2& body) {
  const double dx = waypoint[0] - body[0];
  const double dz = waypoint[1] - body[1];
  const double n = std::hypot(dx, dz);
  if (n == 0.0) return {0.0, 0.0};
  return {dx / n, dz / n};
}

inline RewardBreakdown compute_reward(const EnvState& s, const Terrain& terrain,
                                      const std::vector<Vec2>& waypoints, double v_cmd,
                                      const RewardWeights& w, const Joints& nominal_q,
                                      double edge_margin = 0.05) {
  RewardBreakdown r;
  const BodyState& b = s.body;
  const Vec2 p = waypoints[std::min(s.waypoint, waypoints.size() - 1)];
  const Vec2 d = goal_direction(p, {b.x(), b.z()});
  r.goal_tracking = std::min(b.vel[0] * d[0] + b.vel[1] * d[1], v_cmd);
  for (std::size_t i = 0; i < kNumLegs; ++i)
    if (s.contact[i] && terrain.distance_to_edge(b.foot_pos[i][0]) <= edge_margin)
      r.clearance += 1.0;
  r.lin_vel_z = b.vel[1] * b.vel[1];
  r.pitch_rate = b.vel[2] * b.vel[2];
  double da = 0.0;
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    da += (s.action[j] - s.prev_action[j]) * (s.action[j] - s.prev_action[j]);
    r.joint_accel += b.qdd[j] * b.qdd[j];
    r.joint_cosmetic += (b.q(j) - nominal_q[j]) * (b.q(j) - nominal_q[j]);
    r.torque_change += (s.tau[j] - s.prev_tau[j]) * (s.tau[j] - s.prev_tau[j]);
    r.torque_penalty += s.tau[j] * s.tau[j];
  }
  r.action_rate = std::sqrt(da);
  const double sp = std::sin(b.pitch());
  r.orientation = sp * sp;
  const auto t = r.terms();
  const auto wv = weight_vector(w);
  for (std::size_t k = 0; k < t.size(); ++k) r.total += wv[k] * t[k];
  return r;
}

inline std::array<double, kHeightDim> heights_ahead(const BodyState& b, const Terrain& terrain,
                                                    double clip = 1.0) {
  std::array<double, kHeightDim> m{};
  for (std::size_t k = 0; k < kHeightDim; ++k) {
    const double h = terrain.height(b.x() + 0.1 * static_cast<double>(k));
    m[k] = std::clamp(h - b.z(), -clip, clip);
  }
  return m;
}

/// One simulated robot on one task.
class Env {
 public:
  Env(RobotModel model, std::shared_ptr<const Terrain> terrain, std::vector<Vec2> waypoints,
      const TaskSpec& task, const SimConfig& cfg)
      : model_(std::move(model)),
        terrain_(std::move(terrain)),
        waypoints_(std::move(waypoints)),
        task_(task),
        cfg_(cfg) {}

  const RobotModel& model() const { return model_; }
  void set_model(RobotModel m) { model_ = std::move(m); }
  const EnvState& state() const { return state_; }
  const Terrain& terrain() const { return *terrain_; }
  const TaskSpec& task() const { return task_; }
  const std::vector<Vec2>& waypoints() const { return waypoints_; }
  const SimConfig& config() const { return cfg_; }
  bool done() const { return done_; }
  bool failed() const { return failed_; }
  bool timed_out() const { return done_ && !failed_; }
  double friction() const { return friction_; }
  double motor_strength() const { return motor_strength_; }
  double com_offset() const { return com_offset_; }
  const Observation& observation() const { return obs_; }
  const RewardBreakdown& last_reward() const { return last_reward_; }

  /// Start pose with uniform noise on joint angles and pitch; per-episode
  /// friction, motor strength and CoM offset drawn from their ranges.
  const Observation& reset(Rng& rng) {
    friction_ = uniform(rng, cfg_.friction.lo, cfg_.friction.hi);
    motor_strength_ = uniform(rng, cfg_.motor_strength.lo, cfg_.motor_strength.hi);
    com_offset_ = uniform(rng, cfg_.com_offset.lo, cfg_.com_offset.hi);
    physics_ = cfg_.physics;
    physics_.friction = friction_;
    // A CoM offset shifts the hips (and the body outline) relative to the CoM.
    sim_model_ = model_;
    for (auto& leg : sim_model_.legs) leg.hip_anchor[0] -= com_offset_;

    state_ = EnvState{};
    BodyState& b = state_.body;
    b.pos[2] = cfg_.pitch_noise > 0.0 ? uniform(rng, -cfg_.pitch_noise, cfg_.pitch_noise) : 0.0;
    for (std::size_t j = 0; j < kNumJoints; ++j)
      b.pos[3 + static_cast<int>(j)] =
          cfg_.nominal_q[j] +
          (cfg_.joint_noise > 0.0 ? uniform(rng, -cfg_.joint_noise, cfg_.joint_noise) : 0.0);
    // Lower the body until the lowest foot sits just above the start ground.
    const Kinematics k = kinematics(sim_model_, b.pos, b.vel);
    const double lowest = std::min(k.point[0][1], k.point[1][1]);
    b.pos[1] = terrain_->height(0.0) - lowest + cfg_.spawn_clearance;
    const Kinematics k2 = kinematics(sim_model_, b.pos, b.vel);
    for (std::size_t leg = 0; leg < kNumLegs; ++leg) {
      b.foot_pos[leg] = k2.point[leg];
      b.foot_depth[leg] = terrain_->penetration(k2.point[leg]).depth;
      state_.contact[leg] = b.foot_depth[leg] > 0.0;
    }
    start_ground_ = terrain_->height(0.0);
    done_ = false;
    failed_ = false;
    last_reward_ = RewardBreakdown{};
    const Proprio frame = proprio();
    obs_ = Observation{};
    obs_.history.fill(frame);
    fill_observation(frame);
    return obs_;
  }

  struct StepResult {
    const Observation& obs;
    const RewardBreakdown& reward;
    bool done;
  };

  StepResult step(const Joints& raw_action) {
    if (done_) throw UsageError("step() called on a finished episode; reset first");
    Joints a{};
    for (std::size_t j = 0; j < kNumJoints; ++j)
      a[j] = std::clamp(std::isfinite(raw_action[j]) ? raw_action[j] : 0.0, -cfg_.action_clip,
                        cfg_.action_clip);
    Joints q_des{};
    for (std::size_t j = 0; j < kNumJoints; ++j)
      q_des[j] = cfg_.nominal_q[j] + cfg_.action_scale * a[j];

    state_.prev_tau = state_.tau;
    state_.prev_action = state_.action;
    state_.action = a;
    const double dt = cfg_.policy_dt / cfg_.pd_per_policy;
    BodyState& b = state_.body;
    for (int i = 0; i < cfg_.pd_per_policy && !b.diverged; ++i) {
      const Joints q{b.q(0), b.q(1), b.q(2), b.q(3)};
      const Joints qd{b.qd(0), b.qd(1), b.qd(2), b.qd(3)};
      state_.tau = pd_torque(sim_model_.pd, q_des, q, qd, motor_strength_, cfg_.torque_limit);
      b = physics_step(sim_model_, b, state_.tau, dt, *terrain_, physics_);
    }
    ++state_.step;
    for (std::size_t leg = 0; leg < kNumLegs; ++leg) state_.contact[leg] = b.foot_depth[leg] > 0.0;

    if (b.diverged) {
      last_reward_ = RewardBreakdown{};
      done_ = true;
      failed_ = true;
      return {obs_, last_reward_, true};
    }

    // Waypoints are consumed when reached or passed.
    while (state_.waypoint + 1 < waypoints_.size()) {
      const Vec2& p = waypoints_[state_.waypoint];
      if (std::hypot(p[0] - b.x(), p[1] - b.z()) < cfg_.capture_radius || b.x() > p[0])
        ++state_.waypoint;
      else
        break;
    }

    last_reward_ = compute_reward(state_, *terrain_, waypoints_, task_.v_cmd, cfg_.weights,
                                  cfg_.nominal_q, cfg_.edge_margin);
    failed_ = terminal_failure();
    done_ = failed_ || state_.step >= task_.episode_steps;

    std::rotate(obs_.history.begin(), obs_.history.begin() + 1, obs_.history.end());
    obs_.history.back() = obs_.proprio;
    fill_observation(proprio());
    return {obs_, last_reward_, done_};
  }

 private:
  Proprio proprio() const {
    const BodyState& b = state_.body;
    Proprio x{};
    x[0] = b.pitch();
    x[1] = b.vel[2];
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      x[2 + j] = b.q(j);
      x[6 + j] = b.qd(j);
      x[10 + j] = state_.action[j];
    }
    x[14] = state_.contact[0] ? 1.0 : 0.0;
    x[15] = state_.contact[1] ? 1.0 : 0.0;
    return x;
  }

  void fill_observation(const Proprio& frame) {
    const BodyState& b = state_.body;
    obs_.proprio = frame;
    obs_.explicit_privileged = {b.vel[0], b.vel[1]};
    obs_.privileged = {model_.total_mass, com_offset_,     model_.xi[0],  model_.xi[1],
                       model_.xi[2],      model_.xi[3],    friction_,     motor_strength_};
    obs_.heights = heights_ahead(b, *terrain_, cfg_.height_clip);
  }

  bool terminal_failure() const {
    const BodyState& b = state_.body;
    if (std::abs(b.pitch()) > cfg_.pitch_limit) return true;
    if (b.z() < start_ground_ - cfg_.fall_depth) return true;
    const double hl = model_.body.length / 2.0, hh = model_.body.height / 2.0;
    const double c = std::cos(b.pitch()), s = std::sin(b.pitch());
    for (double sx : {-1.0, 1.0})
      for (double sz : {-1.0, 1.0}) {
        const double lx = sx * hl - com_offset_, lz = sz * hh;
        const Vec2 corner{b.x() + c * lx - s * lz, b.z() + s * lx + c * lz};
        if (terrain_->penetration(corner).depth > 0.0) return true;
      }
    return false;
  }

  RobotModel model_;
  RobotModel sim_model_;
  std::shared_ptr<const Terrain> terrain_;
  std::vector<Vec2> waypoints_;
  TaskSpec task_;
  SimConfig cfg_;
  PhysicsParams physics_;
  EnvState state_;
  Observation obs_;
  RewardBreakdown last_reward_;
  double friction_ = 1.0;
  double motor_strength_ = 1.0;
  double com_offset_ = 0.0;
  double start_ground_ = 0.0;
  bool done_ = true;
  bool failed_ = false;
};

}  // namespace legopt::sim
