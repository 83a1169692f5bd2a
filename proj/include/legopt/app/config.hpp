#pragma once

// Run configuration as one JSON document. Every field has a default; unknown
// keys are rejected. The same field list drives reading and writing, so the
// echoed effective config always round-trips.

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "legopt/codesign/bo.hpp"
#include "legopt/nn/mlp.hpp"
#include "legopt/ppo/config.hpp"
#include "legopt/sim/population.hpp"

namespace legopt::app {

using nlohmann::json;

struct MorphologySection {
  double c_min = 0.6;
  double c_max = 1.4;
  std::array<double, 4> poly{0.0, 0.0, 1.0, 0.0};  // a, b, c, d
  std::string poly_strictness = "reject";           // or "renormalize"
  int temporal_levels = 3;
};

struct RunSection {
  std::uint64_t seed = 0;
  std::size_t n_envs = 256;
  std::string out_dir = "out";
  int threads = 1;
  bool wall_clock = true;  // false: timing fields are written as 0
};

struct ExperimentSection {
  std::size_t dr_test_morphologies = 100;
  std::uint64_t dr_test_seed = 12345;
  std::size_t dr_eval_envs = 4;
  int dr_seeds = 5;
  int heatmap_levels = 3;
};

struct Config {
  BaseRobotSpec robot;
  MorphologySection morphology;
  sim::TaskSpec task;
  sim::SimConfig sim;
  ppo::PpoConfig ppo;
  codesign::BoConfig bo;
  RunSection run;
  ExperimentSection experiments;
};

namespace detail {

class Reader {
 public:
  Reader(const json* j, std::string path) : j_(j), path_(std::move(path)) {
    if (j_ && !j_->is_object()) throw ConfigError("config section '" + path_ + "' must be an object");
  }

  template <typename T>
  void field(const char* key, T& out) {
    seen_.insert(key);
    if (!j_ || !j_->contains(key)) return;
    try {
      out = j_->at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + where(key) + "' has the wrong type");
    }
  }

  template <typename E, typename Parse, typename Name>
  void enumeration(const char* key, E& out, Parse parse, Name) {
    std::string s;
    field(key, s);
    if (!s.empty()) {
      try {
        out = parse(s);
      } catch (const ConfigError& e) {
        throw ConfigError("config key '" + where(key) + "': " + e.what());
      }
    }
  }

  void range(const char* key, double& lo, double& hi) {
    std::array<double, 2> r{lo, hi};
    field(key, r);
    lo = r[0];
    hi = r[1];
  }

  template <typename Fn>
  void section(const char* key, Fn&& fn) {
    seen_.insert(key);
    const json* sub = j_ && j_->contains(key) ? &j_->at(key) : nullptr;
    Reader r(sub, where(key));
    fn(r);
    r.finish();
  }

  template <typename T, std::size_t N, typename Fn>
  void objects(const char* key, std::array<T, N>& arr, Fn&& fn) {
    seen_.insert(key);
    if (!j_ || !j_->contains(key)) {
      for (auto& x : arr) {
        Reader r(nullptr, where(key));
        fn(r, x);
      }
      return;
    }
    const json& a = j_->at(key);
    if (!a.is_array() || a.size() != N)
      throw ConfigError("config key '" + where(key) + "' must be an array of " + std::to_string(N) +
                        " objects");
    for (std::size_t i = 0; i < N; ++i) {
      Reader r(&a[i], where(key) + "[" + std::to_string(i) + "]");
      fn(r, arr[i]);
      r.finish();
    }
  }

  void finish() const {
    if (!j_) return;
    for (const auto& [k, v] : j_->items())
      if (!seen_.count(k)) throw ConfigError("unknown config key '" + where(k.c_str()) + "'");
  }

 private:
  std::string where(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* j_;
  std::string path_;
  std::set<std::string> seen_;
};

class Writer {
 public:
  explicit Writer(json& j) : j_(j) { j_ = json::object(); }

  template <typename T>
  void field(const char* key, const T& v) { j_[key] = v; }

  template <typename E, typename Parse, typename Name>
  void enumeration(const char* key, const E& v, Parse, Name name) { j_[key] = name(v); }

  void range(const char* key, const double& lo, const double& hi) { j_[key] = {lo, hi}; }

  template <typename Fn>
  void section(const char* key, Fn&& fn) {
    json sub;
    Writer w(sub);
    fn(w);
    j_[key] = std::move(sub);
  }

  template <typename T, std::size_t N, typename Fn>
  void objects(const char* key, const std::array<T, N>& arr, Fn&& fn) {
    json a = json::array();
    for (const auto& x : arr) {
      json sub;
      Writer w(sub);
      fn(w, x);
      a.push_back(std::move(sub));
    }
    j_[key] = std::move(a);
  }

 private:
  json& j_;
};

// The single list of configurable fields. C is Config or const Config.
template <typename V, typename C>
void visit(V& v, C& c) {
  v.section("robot", [&](auto& s) {
    s.field("body_length", c.robot.body_length);
    s.field("body_height", c.robot.body_height);
    s.field("body_mass", c.robot.body_mass);
    s.field("hip_x", c.robot.hip_x);
    s.field("hip_z", c.robot.hip_z);
    s.objects("links", c.robot.links, [](auto& l, auto& g) {
      l.field("length", g.length);
      l.field("mass", g.mass);
      l.field("width", g.width);
      l.field("joint_z", g.joint_z);
    });
    s.range("hip_limit", c.robot.hip_limit.lo, c.robot.hip_limit.hi);
    s.range("knee_limit", c.robot.knee_limit.lo, c.robot.knee_limit.hi);
    s.field("kp", c.robot.gains.kp);
    s.field("kd", c.robot.gains.kd);
  });
  v.section("morphology", [&](auto& s) {
    s.field("c_min", c.morphology.c_min);
    s.field("c_max", c.morphology.c_max);
    s.field("poly", c.morphology.poly);
    s.field("poly_strictness", c.morphology.poly_strictness);
    s.field("temporal_levels", c.morphology.temporal_levels);
  });
  v.section("task", [&](auto& s) {
    s.enumeration("kind", c.task.kind, sim::parse_task, sim::task_name);
    s.field("obstacle", c.task.obstacle);
    s.field("obstacle_x", c.task.obstacle_x);
    s.field("waypoints", c.task.waypoints);
    s.field("v_cmd", c.task.v_cmd);
    s.field("episode_steps", c.task.episode_steps);
  });
  v.section("sim", [&](auto& s) {
    s.section("physics", [&](auto& p) {
      p.field("gravity", c.sim.physics.gravity);
      p.field("contact_stiffness", c.sim.physics.contact_stiffness);
      p.field("contact_damping", c.sim.physics.contact_damping);
      p.field("substeps", c.sim.physics.substeps);
      p.field("armature", c.sim.physics.armature);
      p.field("joint_damping", c.sim.physics.joint_damping);
      p.field("limit_stiffness", c.sim.physics.limit_stiffness);
      p.field("limit_damping", c.sim.physics.limit_damping);
      p.field("friction_iterations", c.sim.physics.friction_iterations);
    });
    s.section("reward_weights", [&](auto& w) {
      w.field("goal_tracking", c.sim.weights.goal_tracking);
      w.field("clearance", c.sim.weights.clearance);
      w.field("yaw_tracking", c.sim.weights.yaw_tracking);
      w.field("lin_vel_z", c.sim.weights.lin_vel_z);
      w.field("pitch_rate", c.sim.weights.pitch_rate);
      w.field("action_rate", c.sim.weights.action_rate);
      w.field("hip_position", c.sim.weights.hip_position);
      w.field("joint_accel", c.sim.weights.joint_accel);
      w.field("joint_cosmetic", c.sim.weights.joint_cosmetic);
      w.field("torque_change", c.sim.weights.torque_change);
      w.field("torque_penalty", c.sim.weights.torque_penalty);
      w.field("orientation", c.sim.weights.orientation);
    });
    s.field("policy_dt", c.sim.policy_dt);
    s.field("pd_per_policy", c.sim.pd_per_policy);
    s.field("torque_limit", c.sim.torque_limit);
    s.field("action_scale", c.sim.action_scale);
    s.field("action_clip", c.sim.action_clip);
    s.field("nominal_q", c.sim.nominal_q);
    s.field("joint_noise", c.sim.joint_noise);
    s.field("pitch_noise", c.sim.pitch_noise);
    s.field("spawn_clearance", c.sim.spawn_clearance);
    s.range("friction", c.sim.friction.lo, c.sim.friction.hi);
    s.range("motor_strength", c.sim.motor_strength.lo, c.sim.motor_strength.hi);
    s.range("com_offset", c.sim.com_offset.lo, c.sim.com_offset.hi);
    s.field("capture_radius", c.sim.capture_radius);
    s.field("pitch_limit", c.sim.pitch_limit);
    s.field("fall_depth", c.sim.fall_depth);
    s.field("edge_margin", c.sim.edge_margin);
    s.field("height_clip", c.sim.height_clip);
  });
  v.section("ppo", [&](auto& s) {
    s.field("gamma", c.ppo.gamma);
    s.field("gamma_reg", c.ppo.gamma_reg);
    s.field("lambda", c.ppo.lambda);
    s.field("clip", c.ppo.clip);
    s.field("update_epochs", c.ppo.update_epochs);
    s.field("minibatch_size", c.ppo.minibatch_size);
    s.field("lr_actor", c.ppo.lr_actor);
    s.field("lr_critic", c.ppo.lr_critic);
    s.field("entropy_coef", c.ppo.entropy_coef);
    s.field("value_coef", c.ppo.value_coef);
    s.field("activation_beta", c.ppo.activation_beta);
    s.field("max_grad_norm", c.ppo.max_grad_norm);
    s.enumeration("reg_mode", c.ppo.reg_mode, ppo::parse_reg, ppo::reg_name);
    s.field("rollout_length", c.ppo.rollout_length);
    s.field("epochs", c.ppo.epochs);
    s.field("actor_hidden", c.ppo.actor_hidden);
    s.field("critic_hidden", c.ppo.critic_hidden);
    s.field("activation", c.ppo.activation);
    s.field("init_log_std", c.ppo.init_log_std);
    s.field("obs_clip", c.ppo.obs_clip);
    s.field("checkpoint_every", c.ppo.checkpoint_every);
  });
  v.section("bo", [&](auto& s) {
    s.field("initial_design", c.bo.initial_design);
    s.field("iterations", c.bo.iterations);
    s.field("offset_frac", c.bo.offset_frac);
    s.field("multistarts", c.bo.multistarts);
    s.field("finetune_steps", c.bo.finetune_steps);
    s.field("fitness_envs", c.bo.fitness_envs);
    s.field("fitness_steps", c.bo.fitness_steps);
  });
  v.section("run", [&](auto& s) {
    s.field("seed", c.run.seed);
    s.field("n_envs", c.run.n_envs);
    s.field("out_dir", c.run.out_dir);
    s.field("threads", c.run.threads);
    s.field("wall_clock", c.run.wall_clock);
  });
  v.section("experiments", [&](auto& s) {
    s.field("dr_test_morphologies", c.experiments.dr_test_morphologies);
    s.field("dr_test_seed", c.experiments.dr_test_seed);
    s.field("dr_eval_envs", c.experiments.dr_eval_envs);
    s.field("dr_seeds", c.experiments.dr_seeds);
    s.field("heatmap_levels", c.experiments.heatmap_levels);
  });
}

}  // namespace detail

inline FactorBounds bounds_of(const Config& c) { return {c.morphology.c_min, c.morphology.c_max}; }

inline PdCorrectionPoly poly_of(const Config& c) {
  const auto& p = c.morphology.poly;
  return PdCorrectionPoly(p[0], p[1], p[2], p[3],
                          c.morphology.poly_strictness == "renormalize"
                              ? PdCorrectionPoly::Strictness::kRenormalize
                              : PdCorrectionPoly::Strictness::kReject);
}

inline sim::EnvSetup env_setup(const Config& c) {
  sim::EnvSetup s;
  s.task = c.task;
  s.sim = c.sim;
  s.morph.base = c.robot;
  s.morph.bounds = bounds_of(c);
  s.morph.poly = poly_of(c);
  s.morph.temporal_levels = c.morphology.temporal_levels;
  return s;
}

/// Cross-field checks of every module, run once after loading.
inline void validate(Config& c) {
  validate_spec(c.robot);
  if (!(c.morphology.c_min < c.morphology.c_max) || !(c.morphology.c_min > 0.0))
    throw ConfigError("morphology requires 0 < c_min < c_max");
  if (c.morphology.poly_strictness != "reject" && c.morphology.poly_strictness != "renormalize")
    throw ConfigError("morphology.poly_strictness must be 'reject' or 'renormalize'");
  (void)poly_of(c);
  if (c.morphology.temporal_levels < 2) throw ConfigError("morphology.temporal_levels must be >= 2");
  sim::validate_task(c.task);
  if (c.sim.pd_per_policy < 1 || c.sim.physics.substeps < 1 || !(c.sim.policy_dt > 0.0))
    throw ConfigError("sim timing values must be positive");
  if (!(c.sim.torque_limit > 0.0)) throw ConfigError("sim.torque_limit must be > 0");
  for (const auto* r : {&c.sim.friction, &c.sim.motor_strength, &c.sim.com_offset})
    if (!(r->lo <= r->hi)) throw ConfigError("sim randomization ranges need lo <= hi");
  if (!(c.sim.friction.lo >= 0.0) || !(c.sim.motor_strength.lo > 0.0))
    throw ConfigError("sim friction must be >= 0 and motor strength > 0");
  ppo::validate(c.ppo);
  nn::parse_activation(c.ppo.activation);
  c.bo.bounds = bounds_of(c);
  codesign::validate(c.bo);
  if (c.run.n_envs < 1) throw ConfigError("run.n_envs must be >= 1");
  if (c.run.threads < 1) throw ConfigError("run.threads must be >= 1");
  if (c.experiments.dr_test_morphologies < 2 || c.experiments.dr_eval_envs < 1)
    throw ConfigError("experiments need >= 2 test morphologies and >= 1 eval env");
  if (c.experiments.heatmap_levels < 2) throw ConfigError("experiments.heatmap_levels must be >= 2");
}

inline Config config_from_json(const json& j) {
  Config c;
  detail::Reader r(&j, "");
  detail::visit(r, c);
  r.finish();
  validate(c);
  return c;
}

inline json config_to_json(const Config& c) {
  json j;
  detail::Writer w(j);
  detail::visit(w, c);
  return j;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

/// The config as echoed into outputs. Thread count and output directory
/// cannot change any result, so they are left out; otherwise the same run on
/// a different machine layout would not reproduce byte for byte.
inline json result_config_json(const Config& c) {
  json j = config_to_json(c);
  j["run"].erase("threads");
  j["run"].erase("out_dir");
  return j;
}

/// FNV-1a over the canonical dump of the result config.
inline std::string config_hash(const Config& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : result_config_json(c).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace legopt::app
