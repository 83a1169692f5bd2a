#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "legopt/codesign/fitness.hpp"

namespace legopt::codesign {

struct WelchResult {
  double t = 0.0;
  double dof = 0.0;
  double p = 1.0;  // two-sided
};

/// Two-sided Welch t-test. Degenerate zero-variance samples give p = 1 for
/// equal means and p = 0 otherwise.
inline WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw DataError("welch_t_test needs at least 2 samples per group");
  auto moments = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::pair{m, s / static_cast<double>(v.size() - 1)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double se2 = va / na + vb / nb;
  WelchResult r;
  if (!(se2 > 0.0)) {
    r.p = ma == mb ? 1.0 : 0.0;
    r.t = ma == mb ? 0.0 : std::copysign(INFINITY, ma - mb);
    return r;
  }
  r.t = (ma - mb) / std::sqrt(se2);
  r.dof = se2 * se2 / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
  const boost::math::students_t dist(r.dof);
  r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

struct HeatmapCell {
  ScalingFactors xi;
  double f = 0.0;
  bool valid = true;
  std::string error;
};

/// Policy used for one cell: either a fixed agent or one tuned for that cell.
using PolicyForCell = std::function<ppo::Agent(const ScalingFactors&, std::size_t cell)>;

/// Fitness for every grid entry. A cell whose evaluation throws is marked
/// invalid and the sweep continues.
inline std::vector<HeatmapCell> heatmap_eval(const PolicyForCell& policy,
                                             const std::vector<ScalingFactors>& grid,
                                             const sim::EnvSetup& setup, const FitnessOptions& fo) {
  std::vector<HeatmapCell> cells(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    cells[c].xi = grid[c];
    try {
      const ppo::Agent agent = policy(grid[c], c);
      cells[c].f = evaluate_fitness(agent, grid[c], setup, fo).f;
    } catch (const Error& e) {
      cells[c].valid = false;
      cells[c].f = NAN;
      cells[c].error = e.what();
    }
  }
  return cells;
}

/// Grid of heatmap values for a 4D grid laid out as rows = (xi0, xi1),
/// columns = (xi2, xi3), matching morphology_grid's lexicographic order.
inline std::size_t heatmap_side(std::size_t cells) {
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(cells))));
  if (side * side != cells) throw UsageError("heatmap cell count is not a square");
  return side;
}

/// Randomly drawn test morphologies shared by every mode of a comparison.
inline std::vector<ScalingFactors> test_morphologies(std::size_t n, std::uint64_t seed,
                                                     const FactorBounds& b) {
  Rng rng(mix64(seed ^ 0x7465'7374'6d6f'7270ULL));
  std::vector<ScalingFactors> out(n);
  for (auto& xi : out) xi = sample_factors(rng, b.lo, b.hi);
  return out;
}

struct TrainedPolicy {
  ppo::Agent agent;
  double seconds = 0.0;
  int rebuilds = 0;
};

struct ModeReport {
  sim::DrMode mode;
  std::vector<double> seed_means;        // per seed, mean over test morphologies
  std::vector<double> morphology_means;  // per test morphology, mean over seeds
  double mean = 0.0;                     // of morphology_means
  double std = 0.0;
  double p_vs_spatial = 1.0;             // Welch test on morphology_means
  double seconds = 0.0;                  // total training wall-clock over seeds
  int rebuilds = 0;                      // per run (temporal mode only)
};

struct DrComparisonOptions {
  std::vector<sim::DrMode> modes{sim::DrMode::kSpatial, sim::DrMode::kTemporal, sim::DrMode::kNone};
  std::vector<std::uint64_t> seeds{0, 1};
  std::size_t test_count = 100;
  std::uint64_t test_seed = 12345;
  FitnessOptions fitness{4, 250, 0, 1, 1.0};
};

/// Trains one policy per (mode, seed) via `train(mode, seed)` and scores it on
/// a common set of random morphologies. Modes are compared to spatial with a
/// Welch t-test on the per-morphology means.
template <typename Trainer>
std::vector<ModeReport> dr_comparison(Trainer&& train, const sim::EnvSetup& setup,
                                      const DrComparisonOptions& o) {
  if (o.seeds.size() < 2) throw ConfigError("dr comparison needs at least 2 seeds per mode");
  if (o.test_count < 2) throw ConfigError("dr comparison needs at least 2 test morphologies");
  const auto tests = test_morphologies(o.test_count, o.test_seed, setup.morph.bounds);
  std::vector<ModeReport> reports;
  for (sim::DrMode mode : o.modes) {
    ModeReport r;
    r.mode = mode;
    r.morphology_means.assign(tests.size(), 0.0);
    for (std::uint64_t seed : o.seeds) {
      const TrainedPolicy tp = train(mode, seed);
      r.seconds += tp.seconds;
      r.rebuilds = tp.rebuilds;
      double sum = 0.0;
      for (std::size_t k = 0; k < tests.size(); ++k) {
        FitnessOptions fo = o.fitness;
        fo.seed = mix64(o.test_seed + k);
        const double f = evaluate_fitness(tp.agent, tests[k], setup, fo).f;
        r.morphology_means[k] += f / static_cast<double>(o.seeds.size());
        sum += f;
      }
      r.seed_means.push_back(sum / static_cast<double>(tests.size()));
    }
    r.mean = mean_of(r.morphology_means);
    r.std = stddev_of(r.morphology_means);
    reports.push_back(std::move(r));
  }
  const ModeReport* spatial = nullptr;
  for (const auto& r : reports)
    if (r.mode == sim::DrMode::kSpatial) spatial = &r;
  if (spatial)
    for (auto& r : reports)
      r.p_vs_spatial = welch_t_test(spatial->morphology_means, r.morphology_means).p;
  return reports;
}

}  // namespace legopt::codesign
