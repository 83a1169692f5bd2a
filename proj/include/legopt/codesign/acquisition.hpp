#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "legopt/codesign/gp.hpp"

namespace legopt::codesign {

/// Expected improvement over `best + offset` for maximization.
inline double expected_improvement(double mean, double variance, double best, double offset) {
  const double gain = mean - best - offset;
  const double s = std::sqrt(std::max(variance, 0.0));
  if (!(s > 1e-300)) return std::max(gain, 0.0);
  const double z = gain / s;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  return std::max(0.0, gain * cdf + s * pdf);
}

struct Box {
  Vec lo;
  Vec hi;

  static Box uniform(int dim, double lo, double hi) {
    return {Vec::Constant(dim, lo), Vec::Constant(dim, hi)};
  }
  int dim() const { return static_cast<int>(lo.size()); }
  Vec clip(const Vec& x) const { return x.cwiseMax(lo).cwiseMin(hi); }
};

struct ProposeOptions {
  int multistarts = 16;
  int pool_per_dim = 256;   // random screening points per dimension
  double initial_step = 0.1;  // fraction of the box width
  double min_step = 1e-6;
  double offset = 0.0;      // EI exploration offset in units of y
};

/// Screens a random pool, then polishes the best `multistarts` points with a
/// compass search on EI. Result is inside the box.
inline Vec propose(const GpSurrogate& g, const Box& box, Rng& rng, const ProposeOptions& o = {}) {
  const int d = box.dim();
  const double best = g.y.maxCoeff();
  auto ei = [&](const Vec& x) {
    const auto p = gp_predict(g, x);
    return expected_improvement(p.mean, p.variance, best, o.offset);
  };
  auto random_point = [&] {
    Vec x(d);
    for (int k = 0; k < d; ++k) x[k] = uniform(rng, box.lo[k], box.hi[k]);
    return x;
  };

  const int pool_n = std::max(o.multistarts, o.pool_per_dim * d);
  std::vector<Vec> pool;
  std::vector<double> score;
  pool.reserve(static_cast<std::size_t>(pool_n));
  for (int i = 0; i < pool_n; ++i) {
    pool.push_back(random_point());
    score.push_back(ei(pool.back()));
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  const auto starts = static_cast<std::size_t>(std::max(1, o.multistarts));
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(std::min(starts, order.size())),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      return score[a] > score[b] || (score[a] == score[b] && a < b);
                    });

  Vec best_x = pool[order[0]];
  double best_v = score[order[0]];
  const Vec width = box.hi - box.lo;
  for (std::size_t s = 0; s < std::min(starts, order.size()); ++s) {
    Vec x = pool[order[s]];
    double v = score[order[s]];
    double step = o.initial_step;
    while (step > o.min_step) {
      bool moved = false;
      for (int k = 0; k < d; ++k)
        for (double sign : {1.0, -1.0}) {
          Vec y = x;
          y[k] += sign * step * width[k];
          y = box.clip(y);
          const double vy = ei(y);
          if (vy > v) {
            x = std::move(y);
            v = vy;
            moved = true;
          }
        }
      if (!moved) step *= 0.5;
    }
    if (v > best_v) {
      best_v = v;
      best_x = x;
    }
  }
  return box.clip(best_x);
}

}  // namespace legopt::codesign
