#pragma once

// Planar quadruped morphology: leg-segment scaling, derived link inertials,
// PD gain correction, and sampling/enumeration of the scaling space.

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "legopt/common.hpp"

namespace legopt {

/// Segment order used everywhere a 4-vector of per-segment values appears.
enum Segment : std::size_t { kFrontThigh = 0, kFrontShank = 1, kHindThigh = 2, kHindShank = 3 };
inline constexpr std::size_t kNumSegments = 4;
inline constexpr std::size_t kNumLegs = 2;    // 0 = front pair, 1 = hind pair
inline constexpr std::size_t kNumJoints = 4;  // front hip, front knee, hind hip, hind knee

inline const char* segment_name(std::size_t i) {
  static constexpr const char* kNames[] = {"front thigh", "front shank", "hind thigh",
                                           "hind shank"};
  return i < kNumSegments ? kNames[i] : "segment";
}

struct FactorBounds {
  double lo = 0.6;
  double hi = 1.4;

  bool contains(double xi) const { return xi >= lo && xi <= hi; }
  bool operator==(const FactorBounds&) const = default;
};

/// Scale factors for the two segments of each leg pair. One factor governs
/// both the left and right leg of a pair.
struct ScalingFactors {
  std::array<double, kNumSegments> xi{1.0, 1.0, 1.0, 1.0};

  double operator[](std::size_t i) const { return xi[i]; }
  double& operator[](std::size_t i) { return xi[i]; }
  bool operator==(const ScalingFactors&) const = default;

  static ScalingFactors identity() { return {}; }
};

inline void validate_factors(const ScalingFactors& f, const FactorBounds& b) {
  for (std::size_t i = 0; i < kNumSegments; ++i) {
    if (!std::isfinite(f[i]) || !b.contains(f[i]))
      throw DomainError("scaling factor xi[" + std::to_string(i) + "] (" + segment_name(i) +
                        ") = " + std::to_string(f[i]) + " outside [" + std::to_string(b.lo) +
                        ", " + std::to_string(b.hi) + "]");
  }
}

/// Unscaled geometry of one leg segment: a cuboid with square cross-section.
struct LinkGeometry {
  double length = 0.2;    // l (m)
  double mass = 0.5;      // m (kg)
  double width = 0.03;    // b (m)
  double joint_z = -0.2;  // z offset of the joint this link terminates (knee or ankle)

  bool operator==(const LinkGeometry&) const = default;
};

inline void validate_geometry(const LinkGeometry& g) {
  if (!(g.length > 0.0) || !(g.mass > 0.0) || !(g.width > 0.0))
    throw ConfigError("link geometry requires length, mass and width > 0");
  if (std::abs(std::abs(g.joint_z) - g.length) > 1e-12 * g.length)
    throw ConfigError("link joint offset |z| must equal the link length");
}

struct ScaledLink {
  double origin_z = 0.0;  // centre of mass, link frame (m)
  double mass = 0.0;
  double ixx = 0.0;
  double iyy = 0.0;  // in-plane (pitch-axis) inertia used by the planar dynamics
  double izz = 0.0;
  std::array<double, 3> box{};  // b, b, scaled length

  double length() const { return box[2]; }
  bool operator==(const ScaledLink&) const = default;
};

/// Inertial and geometric block of a link scaled by `xi`, computed from the
/// scaled mass and the scaled length (uniform cuboid).
inline ScaledLink scale_link(const LinkGeometry& geom, double xi,
                             const FactorBounds& bounds = {}, int index = -1) {
  if (!std::isfinite(xi) || !bounds.contains(xi)) {
    std::string who = index >= 0 ? "xi[" + std::to_string(index) + "] (" +
                                       segment_name(static_cast<std::size_t>(index)) + ")"
                                 : std::string("xi");
    throw DomainError(who + " = " + std::to_string(xi) + " outside [" +
                      std::to_string(bounds.lo) + ", " + std::to_string(bounds.hi) + "]");
  }
  validate_geometry(geom);
  const double len = geom.length * xi;
  const double b2 = geom.width * geom.width;
  ScaledLink s;
  s.origin_z = -len / 2.0;
  s.mass = geom.mass * xi;
  s.ixx = s.mass / 12.0 * (b2 + len * len);
  s.iyy = s.ixx;
  s.izz = s.mass * b2 / 6.0;
  s.box = {geom.width, geom.width, len};
  return s;
}

/// eta(xi) = a xi^3 + b xi^2 + c xi + d, with a + b + c + d = 1 so that the
/// default morphology keeps its gains.
class PdCorrectionPoly {
 public:
  enum class Strictness { kReject, kRenormalize };

  PdCorrectionPoly() = default;
  PdCorrectionPoly(double a, double b, double c, double d,
                   Strictness mode = Strictness::kReject)
      : coeffs_{a, b, c, d} {
    for (double v : coeffs_)
      if (!std::isfinite(v)) throw ConfigError("PD correction coefficients must be finite");
    const double sum = a + b + c + d;
    if (std::abs(sum - 1.0) > 1e-12) {
      if (mode == Strictness::kReject || std::abs(sum) < 1e-12)
        throw ConfigError("PD correction coefficients must sum to 1 (got " +
                          std::to_string(sum) + ")");
      for (double& v : coeffs_) v /= sum;
    }
  }

  double a() const { return coeffs_[0]; }
  double b() const { return coeffs_[1]; }
  double c() const { return coeffs_[2]; }
  double d() const { return coeffs_[3]; }
  const std::array<double, 4>& coeffs() const { return coeffs_; }

  bool operator==(const PdCorrectionPoly&) const = default;

 private:
  std::array<double, 4> coeffs_{0.0, 0.0, 1.0, 0.0};
};

inline double pd_correction(const PdCorrectionPoly& poly, double xi) {
  return poly.a() * xi * xi * xi + poly.b() * xi * xi + poly.c() * xi + poly.d();
}

struct PdGains {
  std::array<double, kNumJoints> kp{30.0, 30.0, 30.0, 30.0};
  std::array<double, kNumJoints> kd{1.0, 1.0, 1.0, 1.0};

  bool operator==(const PdGains&) const = default;
};

inline void validate_gains(const PdGains& g) {
  for (std::size_t j = 0; j < kNumJoints; ++j)
    if (!(g.kp[j] > 0.0) || !(g.kd[j] >= 0.0))
      throw ConfigError("PD gains require kp > 0 and kd >= 0");
}

struct JointLimit {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const JointLimit&) const = default;
};

/// Everything the scaled robot is built from; framework defaults, not
/// measured hardware values.
struct BaseRobotSpec {
  double body_length = 0.6;
  double body_height = 0.2;
  double body_mass = 6.0;
  double hip_x = 0.25;  // hips at +hip_x (front) and -hip_x (hind) on the body axis
  double hip_z = 0.0;
  std::array<LinkGeometry, kNumSegments> links{};
  JointLimit hip_limit{-0.8, 2.2};
  JointLimit knee_limit{-2.7, -0.35};
  PdGains gains{};

  bool operator==(const BaseRobotSpec&) const = default;
};

inline void validate_spec(const BaseRobotSpec& s) {
  if (!(s.body_length > 0.0) || !(s.body_height > 0.0) || !(s.body_mass > 0.0))
    throw ConfigError("robot body dimensions and mass must be > 0");
  for (const auto& g : s.links) validate_geometry(g);
  if (!(s.hip_limit.lo < s.hip_limit.hi) || !(s.knee_limit.lo < s.knee_limit.hi))
    throw ConfigError("joint limits require lo < hi");
  validate_gains(s.gains);
}

struct BodyLink {
  double length = 0.0;
  double height = 0.0;
  double mass = 0.0;
  double iyy = 0.0;
  bool operator==(const BodyLink&) const = default;
};

struct LegModel {
  std::array<double, 2> hip_anchor{};  // body frame (x, z)
  ScaledLink thigh;
  ScaledLink shank;
  double knee_z = 0.0;  // knee joint origin in the thigh frame
  double foot_z = 0.0;  // ankle/foot point in the shank frame
  bool operator==(const LegModel&) const = default;
};

struct RobotModel {
  BodyLink body;
  std::array<LegModel, kNumLegs> legs;
  std::array<JointLimit, kNumJoints> limits;
  PdGains pd;
  double total_mass = 0.0;
  ScalingFactors xi;

  bool operator==(const RobotModel&) const = default;
};

inline BodyLink make_body(const BaseRobotSpec& spec) {
  BodyLink body;
  body.length = spec.body_length;
  body.height = spec.body_height;
  body.mass = spec.body_mass;
  body.iyy = spec.body_mass / 12.0 *
             (spec.body_length * spec.body_length + spec.body_height * spec.body_height);
  return body;
}

/// Builds the concrete planar robot for `xi`. The thigh factor corrects the
/// gains of its leg's hip-pitch joint, the shank factor those of the knee.
inline RobotModel build_robot(const BaseRobotSpec& spec, const ScalingFactors& xi,
                              const PdCorrectionPoly& poly, const PdGains& base_gains,
                              const FactorBounds& bounds = {}) {
  validate_spec(spec);
  validate_gains(base_gains);
  RobotModel m;
  m.body = make_body(spec);
  m.xi = xi;
  m.total_mass = m.body.mass;
  for (std::size_t leg = 0; leg < kNumLegs; ++leg) {
    const std::size_t ti = 2 * leg;
    const std::size_t si = 2 * leg + 1;
    LegModel& L = m.legs[leg];
    L.hip_anchor = {leg == 0 ? spec.hip_x : -spec.hip_x, spec.hip_z};
    L.thigh = scale_link(spec.links[ti], xi[ti], bounds, static_cast<int>(ti));
    L.shank = scale_link(spec.links[si], xi[si], bounds, static_cast<int>(si));
    L.knee_z = spec.links[ti].joint_z * xi[ti];
    L.foot_z = spec.links[si].joint_z * xi[si];
    m.total_mass += L.thigh.mass + L.shank.mass;
    m.limits[ti] = spec.hip_limit;
    m.limits[si] = spec.knee_limit;
    const double eta_hip = pd_correction(poly, xi[ti]);
    const double eta_knee = pd_correction(poly, xi[si]);
    m.pd.kp[ti] = base_gains.kp[ti] * eta_hip;
    m.pd.kd[ti] = base_gains.kd[ti] * eta_hip;
    m.pd.kp[si] = base_gains.kp[si] * eta_knee;
    m.pd.kd[si] = base_gains.kd[si] * eta_knee;
  }
  validate_gains(m.pd);
  return m;
}

/// Robot described directly by the base spec, without going through scaling.
inline RobotModel base_model(const BaseRobotSpec& spec) {
  validate_spec(spec);
  RobotModel m;
  m.body = make_body(spec);
  m.total_mass = m.body.mass;
  for (std::size_t leg = 0; leg < kNumLegs; ++leg) {
    LegModel& L = m.legs[leg];
    L.hip_anchor = {leg == 0 ? spec.hip_x : -spec.hip_x, spec.hip_z};
    auto plain = [](const LinkGeometry& g) {
      ScaledLink s;
      const double b2 = g.width * g.width;
      s.origin_z = -g.length / 2.0;
      s.mass = g.mass;
      s.ixx = s.mass / 12.0 * (b2 + g.length * g.length);
      s.iyy = s.ixx;
      s.izz = s.mass * b2 / 6.0;
      s.box = {g.width, g.width, g.length};
      return s;
    };
    L.thigh = plain(spec.links[2 * leg]);
    L.shank = plain(spec.links[2 * leg + 1]);
    L.knee_z = spec.links[2 * leg].joint_z;
    L.foot_z = spec.links[2 * leg + 1].joint_z;
    m.total_mass += L.thigh.mass + L.shank.mass;
    m.limits[2 * leg] = spec.hip_limit;
    m.limits[2 * leg + 1] = spec.knee_limit;
  }
  m.pd = spec.gains;
  return m;
}

inline ScalingFactors sample_factors(Rng& rng, double c_min, double c_max) {
  if (!(c_min <= c_max) || !std::isfinite(c_min) || !std::isfinite(c_max))
    throw ConfigError("sample_factors requires c_min <= c_max");
  ScalingFactors f;
  for (std::size_t i = 0; i < kNumSegments; ++i)
    f[i] = c_min == c_max ? c_min : uniform(rng, c_min, c_max);
  return f;
}

/// Cartesian product of `levels` equispaced values per factor, index 0 most
/// significant (lexicographic order).
inline std::vector<ScalingFactors> morphology_grid(int levels, const FactorBounds& b = {}) {
  if (levels < 2) throw ConfigError("morphology grid needs at least 2 levels per factor");
  std::vector<double> values(static_cast<std::size_t>(levels));
  for (int k = 0; k < levels; ++k)
    values[static_cast<std::size_t>(k)] =
        k == levels - 1 ? b.hi : b.lo + (b.hi - b.lo) * k / (levels - 1);
  const std::size_t n = static_cast<std::size_t>(levels);
  std::vector<ScalingFactors> out;
  out.reserve(n * n * n * n);
  for (std::size_t i0 = 0; i0 < n; ++i0)
    for (std::size_t i1 = 0; i1 < n; ++i1)
      for (std::size_t i2 = 0; i2 < n; ++i2)
        for (std::size_t i3 = 0; i3 < n; ++i3)
          out.push_back(ScalingFactors{{values[i0], values[i1], values[i2], values[i3]}});
  return out;
}

}  // namespace legopt
