#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "legopt/codesign/acquisition.hpp"
#include "legopt/morphology.hpp"

namespace legopt::codesign {

struct BoConfig {
  FactorBounds bounds;
  int initial_design = 8;
  int iterations = 40;        // proposals after the initial design; 0 = initial design only
  double offset_frac = 0.01;  // EI offset as a fraction of max(y) - min(y)
  int multistarts = 16;
  int finetune_steps = 30;    // PPO epochs per candidate
  std::size_t fitness_envs = 16;
  int fitness_steps = 250;
};

inline void validate(const BoConfig& c) {
  if (!(c.bounds.lo < c.bounds.hi)) throw ConfigError("bo bounds need lo < hi");
  if (c.initial_design < 1) throw ConfigError("bo.initial_design must be >= 1");
  if (c.iterations < 0) throw ConfigError("bo.iterations must be >= 0");
  if (c.multistarts < 1) throw ConfigError("bo.multistarts must be >= 1");
  if (c.finetune_steps < 0) throw ConfigError("bo.finetune_steps must be >= 0");
  if (c.fitness_envs < 1 || c.fitness_steps < 1)
    throw ConfigError("bo.fitness_envs and bo.fitness_steps must be >= 1");
  if (!(c.offset_frac >= 0.0)) throw ConfigError("bo.offset_frac must be >= 0");
}

/// What an evaluator reports for one candidate.
struct Evaluation {
  double f = 0.0;
  std::string checkpoint;  // where the tuned policy was written, if anywhere
  bool finetune_failed = false;
};

struct CandidateRecord {
  int iteration = 0;  // 0-based; the first initial_design entries are the initial design
  ScalingFactors xi;
  double f = 0.0;
  std::string checkpoint;
  double seconds = 0.0;
  bool finetune_failed = false;
};

struct CodesignResult {
  CandidateRecord best;
  std::vector<CandidateRecord> records;
};

/// Per-dimension stratified sample: each axis is cut into n strata and every
/// stratum receives exactly one point.
inline std::vector<Vec> stratified_design(int n, const Box& box, Rng& rng) {
  const int d = box.dim();
  std::vector<Vec> pts(static_cast<std::size_t>(n), Vec(d));
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int k = 0; k < d; ++k) {
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
    for (int i = 0; i < n; ++i) {
      const double u = (perm[static_cast<std::size_t>(i)] + uniform01(rng)) / n;
      pts[static_cast<std::size_t>(i)][k] = box.lo[k] + u * (box.hi[k] - box.lo[k]);
    }
  }
  return pts;
}

inline ScalingFactors to_factors(const Vec& x) {
  ScalingFactors s;
  for (std::size_t i = 0; i < kNumSegments; ++i) s.xi[i] = x[static_cast<Eigen::Index>(i)];
  return s;
}

inline Vec to_vec(const ScalingFactors& s) {
  Vec x(static_cast<Eigen::Index>(kNumSegments));
  for (std::size_t i = 0; i < kNumSegments; ++i) x[static_cast<Eigen::Index>(i)] = s.xi[i];
  return x;
}

/// Argmax over records; the earliest wins ties.
inline const CandidateRecord& best_record(const std::vector<CandidateRecord>& r) {
  if (r.empty()) throw UsageError("no candidate records");
  std::size_t b = 0;
  for (std::size_t i = 1; i < r.size(); ++i)
    if (r[i].f > r[b].f) b = i;
  return r[b];
}

/// Bayesian optimization over the scaling-factor box. `evaluate(xi, iteration)`
/// returns an Evaluation (fine-tune + fitness in production, any function in
/// tests). `on_record` sees each record as soon as it exists.
template <typename Evaluator>
CodesignResult run_codesign(const BoConfig& cfg, std::uint64_t seed, Evaluator&& evaluate,
                            bool wall_clock = true,
                            const std::function<void(const CandidateRecord&)>& on_record = {}) {
  validate(cfg);
  const Box box = Box::uniform(static_cast<int>(kNumSegments), cfg.bounds.lo, cfg.bounds.hi);
  Rng rng(mix64(seed ^ 0x626f'5f6c'6f6f'7000ULL));
  CodesignResult out;
  Mat X(0, box.dim());
  Vec y(0);

  auto run_one = [&](const Vec& x, int iteration) {
    const auto t0 = std::chrono::steady_clock::now();
    CandidateRecord rec;
    rec.iteration = iteration;
    rec.xi = to_factors(box.clip(x));
    const Evaluation e = evaluate(rec.xi, iteration);
    if (!std::isfinite(e.f)) throw NumericError("non-finite fitness at iteration " + std::to_string(iteration));
    rec.f = e.f;
    rec.checkpoint = e.checkpoint;
    rec.finetune_failed = e.finetune_failed;
    if (wall_clock)
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.records.push_back(rec);
    X.conservativeResize(X.rows() + 1, Eigen::NoChange);
    X.row(X.rows() - 1) = to_vec(rec.xi).transpose();
    y.conservativeResize(y.size() + 1);
    y[y.size() - 1] = rec.f;
    if (on_record) on_record(rec);
  };

  for (const Vec& x : stratified_design(cfg.initial_design, box, rng))
    run_one(x, static_cast<int>(out.records.size()));

  ProposeOptions po;
  po.multistarts = cfg.multistarts;
  for (int it = 0; it < cfg.iterations; ++it) {
    const GpSurrogate g = gp_fit(X, y);
    po.offset = cfg.offset_frac * (y.maxCoeff() - y.minCoeff());
    run_one(propose(g, box, rng, po), static_cast<int>(out.records.size()));
  }
  out.best = best_record(out.records);
  return out;
}

/// Equal-budget baseline: n uniform random candidates.
template <typename Evaluator>
CodesignResult random_search(const FactorBounds& bounds, int n, std::uint64_t seed, Evaluator&& evaluate) {
  if (n < 1) throw ConfigError("random search needs at least one candidate");
  Rng rng(mix64(seed ^ 0x7261'6e64'6f6d'0000ULL));
  CodesignResult out;
  for (int i = 0; i < n; ++i) {
    CandidateRecord rec;
    rec.iteration = i;
    rec.xi = sample_factors(rng, bounds.lo, bounds.hi);
    const Evaluation e = evaluate(rec.xi, i);
    rec.f = e.f;
    rec.checkpoint = e.checkpoint;
    out.records.push_back(rec);
  }
  out.best = best_record(out.records);
  return out;
}

}  // namespace legopt::codesign
