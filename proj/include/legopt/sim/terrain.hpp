#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "legopt/common.hpp"

namespace legopt::sim {

using Vec2 = std::array<double, 2>;

enum class TaskKind { kLongJump, kHighJump };

inline const char* task_name(TaskKind k) {
  return k == TaskKind::kLongJump ? "long_jump" : "high_jump";
}

inline TaskKind parse_task(const std::string& s) {
  if (s == "long_jump") return TaskKind::kLongJump;
  if (s == "high_jump") return TaskKind::kHighJump;
  throw ConfigError("unknown task '" + s + "' (expected long_jump or high_jump)");
}

struct TaskSpec {
  TaskKind kind = TaskKind::kLongJump;
  double obstacle = 0.3;     // gap width or platform height (m)
  double obstacle_x = 1.5;   // where the gap or step begins (m)
  std::vector<Vec2> waypoints;  // empty: generated by default_waypoints()
  double v_cmd = 1.0;
  int episode_steps = 250;
};

/// Piecewise-constant height field. heights[i] holds on [edges[i-1], edges[i]);
/// heights.front() extends to -inf and heights.back() to +inf. A height of
/// -inf marks a fall region.
class Terrain {
 public:
  Terrain() : heights_{0.0} {}
  Terrain(std::vector<double> edges, std::vector<double> heights)
      : edges_(std::move(edges)), heights_(std::move(heights)) {
    if (heights_.size() != edges_.size() + 1)
      throw ConfigError("terrain needs one more height than edges");
    if (!std::is_sorted(edges_.begin(), edges_.end()))
      throw ConfigError("terrain edges must be sorted");
  }

  std::size_t segment(double x) const {
    return static_cast<std::size_t>(std::upper_bound(edges_.begin(), edges_.end(), x) -
                                    edges_.begin());
  }

  double height(double x) const { return heights_[segment(x)]; }

  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& heights() const { return heights_; }

  double distance_to_edge(double x) const {
    double best = std::numeric_limits<double>::infinity();
    for (double e : edges_) best = std::min(best, std::abs(x - e));
    return best;
  }

  /// Penetration of point p into solid terrain, with the outward surface
  /// normal of the nearest face (top or wall). depth <= 0 means free.
  struct Penetration {
    double depth = 0.0;
    Vec2 normal{0.0, 1.0};
  };

  Penetration penetration(const Vec2& p) const {
    Penetration out;
    const std::size_t s = segment(p[0]);
    const double h = heights_[s];
    if (!(h > p[1])) {
      out.depth = std::isfinite(h) ? h - p[1] : -std::numeric_limits<double>::infinity();
      return out;
    }
    out.depth = h - p[1];
    // Walls: a neighbouring segment whose top lies below the point is open air.
    if (s > 0 && heights_[s - 1] < p[1]) {
      const double d = p[0] - edges_[s - 1];
      if (d < out.depth) out = {d, {-1.0, 0.0}};
    }
    if (s < edges_.size() && heights_[s + 1] < p[1]) {
      const double d = edges_[s] - p[0];
      if (d < out.depth) out = {d, {1.0, 0.0}};
    }
    return out;
  }

 private:
  std::vector<double> edges_;
  std::vector<double> heights_;
};

inline void validate_task(const TaskSpec& t) {
  if (!(t.obstacle > 0.0) || !std::isfinite(t.obstacle))
    throw ConfigError("task obstacle parameter must be > 0");
  if (!(t.v_cmd > 0.0)) throw ConfigError("task v_cmd must be > 0");
  if (t.episode_steps < 1) throw ConfigError("task episode_steps must be >= 1");
  if (!t.waypoints.empty()) {
    if (t.waypoints.size() < 2) throw ConfigError("task needs at least 2 waypoints");
    for (std::size_t i = 1; i < t.waypoints.size(); ++i)
      if (!(t.waypoints[i][0] > t.waypoints[i - 1][0]))
        throw ConfigError("task waypoints must have strictly increasing x");
  }
}

inline Terrain make_terrain(const TaskSpec& task) {
  validate_task(task);
  const double x0 = task.obstacle_x;
  if (task.kind == TaskKind::kLongJump)
    return Terrain({x0, x0 + task.obstacle},
                   {0.0, -std::numeric_limits<double>::infinity(), 0.0});
  return Terrain({x0}, {0.0, task.obstacle});
}

/// Waypoints straddling the obstacle at body height above the local ground,
/// ending far enough ahead that goal tracking stays active all episode.
inline std::vector<Vec2> default_waypoints(const TaskSpec& task, double body_height) {
  const double x0 = task.obstacle_x;
  const double far_side = task.kind == TaskKind::kLongJump ? x0 + task.obstacle : x0;
  const double top = task.kind == TaskKind::kLongJump ? 0.0 : task.obstacle;
  return {{x0 - 0.3, body_height},
          {far_side + 0.4, top + body_height},
          {far_side + 2.0, top + body_height},
          {far_side + 20.0, top + body_height}};
}

}  // namespace legopt::sim
