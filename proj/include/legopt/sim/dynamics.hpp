#pragma once

// Reduced-coordinate planar dynamics of the two-leg sagittal quadruped.
//
// Generalized coordinates: [x, z, pitch, q_front_hip, q_front_knee,
// q_hind_hip, q_hind_knee]. All angles are counter-clockwise rotations in the
// x-z plane (x forward, z up), so positive pitch is nose-up and a positive hip
// angle swings the leg forward. A link at absolute angle phi maps its local
// offset (0, z) to R(phi) (0, z); z < 0 points down the link.

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "legopt/morphology.hpp"
#include "legopt/sim/terrain.hpp"

namespace legopt::sim {

inline constexpr int kDof = 7;
inline constexpr int kNumBodies = 5;    // body, front thigh, front shank, hind thigh, hind shank
inline constexpr int kNumContacts = 4;  // front foot, hind foot, front knee, hind knee

using VecQ = Eigen::Matrix<double, kDof, 1>;
using MatQ = Eigen::Matrix<double, kDof, kDof>;
using Jac2 = Eigen::Matrix<double, 2, kDof>;
using Joints = std::array<double, kNumJoints>;

struct PhysicsParams {
  double gravity = 9.81;
  double contact_stiffness = 2.0e4;
  double contact_damping = 2.0e2;
  double friction = 1.0;  // Coulomb coefficient; per-env value overrides this at reset
  int substeps = 4;
  double armature = 0.01;       // reflected rotor inertia per joint (kg m^2)
  double joint_damping = 0.0;   // passive viscous damping (N m s/rad)
  double limit_stiffness = 300.0;
  double limit_damping = 0.5;
  bool contacts = true;
  bool joint_limits = true;
  int friction_iterations = 4;
};

/// Physical part of the environment state.
struct BodyState {
  VecQ pos = VecQ::Zero();
  VecQ vel = VecQ::Zero();
  Joints qdd{};
  std::array<double, kNumLegs> foot_depth{};
  std::array<Vec2, kNumLegs> foot_pos{};
  bool diverged = false;

  double x() const { return pos[0]; }
  double z() const { return pos[1]; }
  double pitch() const { return pos[2]; }
  double q(std::size_t j) const { return pos[3 + static_cast<int>(j)]; }
  double qd(std::size_t j) const { return vel[3 + static_cast<int>(j)]; }
};

/// Positions, Jacobians and velocity-product accelerations of every body
/// centre of mass and contact point.
struct Kinematics {
  std::array<Vec2, kNumBodies> com;
  std::array<Jac2, kNumBodies> com_jac;
  std::array<Eigen::Vector2d, kNumBodies> com_bias;
  std::array<Vec2, kNumContacts> point;
  std::array<Jac2, kNumContacts> point_jac;
};

namespace detail {

inline Eigen::Vector2d rotate(double phi, double lx, double lz) {
  const double c = std::cos(phi), s = std::sin(phi);
  return {c * lx - s * lz, s * lx + c * lz};
}

// Accumulates one rotated term of a point expression. `level` is the chain
// depth of the term's angle: 0 = pitch, 1 = pitch + hip, 2 = pitch + hip + knee.
struct PointBuilder {
  Eigen::Vector2d p;
  Jac2 J;
  Eigen::Vector2d bias = Eigen::Vector2d::Zero();

  PointBuilder(double x, double z) : p(x, z) {
    J.setZero();
    J(0, 0) = 1.0;
    J(1, 1) = 1.0;
  }

  void add(const Eigen::Vector2d& v, int level, int hip_col, double rate) {
    p += v;
    const Eigen::Vector2d perp(-v.y(), v.x());
    J.col(2) += perp;
    if (level >= 1) J.col(hip_col) += perp;
    if (level >= 2) J.col(hip_col + 1) += perp;
    bias -= rate * rate * v;
  }
};

}  // namespace detail

inline Kinematics kinematics(const RobotModel& m, const VecQ& pos, const VecQ& vel) {
  Kinematics k;
  const double th = pos[2];
  detail::PointBuilder body(pos[0], pos[1]);
  k.com[0] = {pos[0], pos[1]};
  k.com_jac[0] = body.J;
  k.com_bias[0].setZero();
  for (std::size_t leg = 0; leg < kNumLegs; ++leg) {
    const LegModel& L = m.legs[leg];
    const int hc = 3 + 2 * static_cast<int>(leg);
    const double phi1 = th + pos[hc];
    const double phi2 = phi1 + pos[hc + 1];
    const double w0 = vel[2];
    const double w1 = w0 + vel[hc];
    const double w2 = w1 + vel[hc + 1];

    detail::PointBuilder hip(pos[0], pos[1]);
    hip.add(detail::rotate(th, L.hip_anchor[0], L.hip_anchor[1]), 0, hc, w0);

    detail::PointBuilder thigh = hip;
    thigh.add(detail::rotate(phi1, 0.0, L.thigh.origin_z), 1, hc, w1);

    detail::PointBuilder knee = hip;
    knee.add(detail::rotate(phi1, 0.0, L.knee_z), 1, hc, w1);

    detail::PointBuilder shank = knee;
    shank.add(detail::rotate(phi2, 0.0, L.shank.origin_z), 2, hc, w2);

    detail::PointBuilder foot = knee;
    foot.add(detail::rotate(phi2, 0.0, L.foot_z), 2, hc, w2);

    const std::size_t bt = 1 + 2 * leg;
    k.com[bt] = {thigh.p.x(), thigh.p.y()};
    k.com_jac[bt] = thigh.J;
    k.com_bias[bt] = thigh.bias;
    k.com[bt + 1] = {shank.p.x(), shank.p.y()};
    k.com_jac[bt + 1] = shank.J;
    k.com_bias[bt + 1] = shank.bias;
    k.point[leg] = {foot.p.x(), foot.p.y()};
    k.point_jac[leg] = foot.J;
    k.point[2 + leg] = {knee.p.x(), knee.p.y()};
    k.point_jac[2 + leg] = knee.J;
  }
  return k;
}

inline std::array<double, kNumBodies> body_masses(const RobotModel& m) {
  return {m.body.mass, m.legs[0].thigh.mass, m.legs[0].shank.mass, m.legs[1].thigh.mass,
          m.legs[1].shank.mass};
}

inline std::array<double, kNumBodies> body_inertias(const RobotModel& m) {
  return {m.body.iyy, m.legs[0].thigh.iyy, m.legs[0].shank.iyy, m.legs[1].thigh.iyy,
          m.legs[1].shank.iyy};
}

// Angular-velocity Jacobian of each body is a 0/1 row: pitch plus the joints
// above it in its chain.
inline Eigen::Matrix<double, 1, kDof> angular_jac(int body) {
  Eigen::Matrix<double, 1, kDof> w = Eigen::Matrix<double, 1, kDof>::Zero();
  w(2) = 1.0;
  if (body == 0) return w;
  const int leg = (body - 1) / 2;
  const int hc = 3 + 2 * leg;
  w(hc) = 1.0;
  if ((body - 1) % 2 == 1) w(hc + 1) = 1.0;
  return w;
}

inline MatQ mass_matrix(const RobotModel& m, const Kinematics& k, double armature) {
  const auto mass = body_masses(m);
  const auto inertia = body_inertias(m);
  MatQ M = MatQ::Zero();
  for (int b = 0; b < kNumBodies; ++b) {
    M.noalias() += mass[b] * k.com_jac[b].transpose() * k.com_jac[b];
    const auto w = angular_jac(b);
    M.noalias() += inertia[b] * w.transpose() * w;
  }
  for (int j = 3; j < kDof; ++j) M(j, j) += armature;
  return M;
}

inline double kinetic_energy(const RobotModel& m, const BodyState& s, double armature) {
  const Kinematics k = kinematics(m, s.pos, s.vel);
  return 0.5 * s.vel.dot(mass_matrix(m, k, armature) * s.vel);
}

inline double potential_energy(const RobotModel& m, const BodyState& s, double gravity) {
  const Kinematics k = kinematics(m, s.pos, s.vel);
  const auto mass = body_masses(m);
  double pe = 0.0;
  for (int b = 0; b < kNumBodies; ++b) pe += mass[b] * gravity * k.com[b][1];
  return pe;
}

inline double mechanical_energy(const RobotModel& m, const BodyState& s, const PhysicsParams& p) {
  return kinetic_energy(m, s, p.armature) + potential_energy(m, s, p.gravity);
}

/// Advances the state by dt under joint torques `tau`, held constant over
/// `substeps` semi-implicit Euler substeps. Feet and knees collide with the
/// terrain through a spring-damper normal force; tangential Coulomb friction
/// is solved as a clamped velocity-level impulse per substep.
inline BodyState physics_step(const RobotModel& m, const BodyState& in, const Joints& tau,
                              double dt, const Terrain& terrain, const PhysicsParams& p) {
  BodyState s = in;
  const int nsub = std::max(1, p.substeps);
  const double h = dt / nsub;
  const auto mass = body_masses(m);
  const Joints qd_old{s.qd(0), s.qd(1), s.qd(2), s.qd(3)};

  for (int sub = 0; sub < nsub; ++sub) {
    const Kinematics k = kinematics(m, s.pos, s.vel);
    const MatQ M = mass_matrix(m, k, p.armature);

    VecQ f = VecQ::Zero();
    for (int b = 0; b < kNumBodies; ++b) {
      Eigen::Vector2d a = k.com_bias[b];
      a.y() += p.gravity;
      f.noalias() -= mass[b] * k.com_jac[b].transpose() * a;
    }
    for (int j = 0; j < static_cast<int>(kNumJoints); ++j) {
      const int c = 3 + j;
      double t = tau[static_cast<std::size_t>(j)] - p.joint_damping * s.vel[c];
      if (p.joint_limits) {
        const JointLimit& lim = m.limits[static_cast<std::size_t>(j)];
        if (s.pos[c] < lim.lo)
          t += p.limit_stiffness * (lim.lo - s.pos[c]) - p.limit_damping * std::min(0.0, s.vel[c]);
        else if (s.pos[c] > lim.hi)
          t += p.limit_stiffness * (lim.hi - s.pos[c]) - p.limit_damping * std::max(0.0, s.vel[c]);
      }
      f[c] += t;
    }

    struct Active {
      Eigen::Matrix<double, 1, kDof> jt;
      double max_impulse;
    };
    std::array<Active, kNumContacts> active;
    int n_active = 0;
    if (p.contacts) {
      for (int c = 0; c < kNumContacts; ++c) {
        const auto pen = terrain.penetration(k.point[c]);
        if (!(pen.depth > 0.0)) continue;
        const Eigen::Vector2d n(pen.normal[0], pen.normal[1]);
        const Eigen::Matrix<double, 1, kDof> jn = n.transpose() * k.point_jac[c];
        const double vn = jn.dot(s.vel);
        const double fn =
            std::max(0.0, p.contact_stiffness * pen.depth - p.contact_damping * vn);
        f.noalias() += fn * jn.transpose();
        const Eigen::Vector2d t(n.y(), -n.x());
        active[n_active++] = {t.transpose() * k.point_jac[c], p.friction * fn * h};
      }
    }

    const Eigen::LDLT<MatQ> ldlt(M);
    VecQ v = s.vel + h * ldlt.solve(f);

    if (n_active > 0) {
      std::array<VecQ, kNumContacts> minv_jt;
      std::array<double, kNumContacts> w{}, acc{};
      for (int c = 0; c < n_active; ++c) {
        minv_jt[c] = ldlt.solve(active[c].jt.transpose());
        w[c] = active[c].jt.dot(minv_jt[c]);
      }
      for (int it = 0; it < p.friction_iterations; ++it) {
        for (int c = 0; c < n_active; ++c) {
          if (!(w[c] > 0.0)) continue;
          const double vt = active[c].jt.dot(v);
          const double lim = active[c].max_impulse;
          const double next = std::clamp(acc[c] - vt / w[c], -lim, lim);
          v += (next - acc[c]) * minv_jt[c];
          acc[c] = next;
        }
      }
    }

    s.vel = v;
    s.pos += h * v;
    if (!all_finite(s.pos.data(), kDof) || !all_finite(s.vel.data(), kDof)) {
      s.diverged = true;
      break;
    }
  }

  for (std::size_t j = 0; j < kNumJoints; ++j) s.qdd[j] = (s.qd(j) - qd_old[j]) / dt;
  const Kinematics k = kinematics(m, s.pos, s.vel);
  for (std::size_t leg = 0; leg < kNumLegs; ++leg) {
    s.foot_pos[leg] = k.point[leg];
    s.foot_depth[leg] = terrain.penetration(k.point[leg]).depth;
  }
  return s;
}

}  // namespace legopt::sim
