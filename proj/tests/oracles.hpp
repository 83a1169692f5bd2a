#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance runner. Deliberately naive: no code is shared with the library
// routines they check.

#include <algorithm>
#include <cmath>
#include <vector>

#include "legopt/nn/mlp.hpp"

namespace legopt::oracle {

/// O(T^2) advantage: A_t = sum_l (gamma lambda)^l delta_{t+l}, truncated at
/// the first episode end and at the buffer end.
inline std::vector<double> gae_bruteforce(const std::vector<double>& r, const std::vector<double>& v,
                                          const std::vector<unsigned char>& done,
                                          const std::vector<double>& bootstrap, std::size_t envs,
                                          double gamma, double lambda) {
  const std::size_t T = r.size() / envs;
  std::vector<double> adv(r.size(), 0.0);
  for (std::size_t e = 0; e < envs; ++e)
    for (std::size_t t = 0; t < T; ++t) {
      double sum = 0.0, w = 1.0;
      for (std::size_t k = t; k < T; ++k) {
        const std::size_t i = k * envs + e;
        const double next = done[i] ? 0.0 : (k + 1 < T ? v[(k + 1) * envs + e] : bootstrap[e]);
        sum += w * (r[i] + gamma * next - v[i]);
        if (done[i]) break;
        w *= gamma * lambda;
      }
      adv[t * envs + e] = sum;
    }
  return adv;
}

/// Largest relative disagreement between backward() and central finite
/// differences of L = sum(weights .* net(x)). Entries whose magnitude is below
/// `floor` are compared on the absolute scale of `floor`.
inline double gradient_check(nn::Mlp net, const nn::Matrix& x, const nn::Matrix& weights,
                             double h = 1e-5, double floor = 1e-6) {
  nn::Mlp::Cache cache;
  net.forward(x, cache);
  nn::ParamVector grad(net.params().size(), 0.0);
  net.backward(cache, weights, grad);
  auto loss = [&] { return (net.forward(x).array() * weights.array()).sum(); };
  double worst = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double p0 = net.params()[i];
    net.params()[i] = p0 + h;
    const double lp = loss();
    net.params()[i] = p0 - h;
    const double lm = loss();
    net.params()[i] = p0;
    const double fd = (lp - lm) / (2.0 * h);
    const double scale = std::max({std::abs(fd), std::abs(grad[i]), floor});
    worst = std::max(worst, std::abs(fd - grad[i]) / scale);
  }
  return worst;
}

}  // namespace legopt::oracle

#include "legopt/codesign/bo.hpp"

namespace legopt::oracle {

/// BO with the trainer replaced by f(xi) = -||xi - target||^2, against random
/// search with the same number of evaluations.
struct SyntheticBoOutcome {
  ScalingFactors target;
  double linf = 0.0;       // ||best xi - target||_inf for BO
  double bo_regret = 0.0;  // simple regret: f(target) - best f
  double rs_regret = 0.0;
};

inline SyntheticBoOutcome synthetic_bo(std::uint64_t seed, int initial = 8, int iterations = 40) {
  Rng rng(mix64(seed + 0x5eed));
  SyntheticBoOutcome out;
  out.target = sample_factors(rng, 0.7, 1.3);
  auto f = [&](const ScalingFactors& xi, int) {
    double s = 0.0;
    for (std::size_t k = 0; k < kNumSegments; ++k) s += (xi[k] - out.target[k]) * (xi[k] - out.target[k]);
    return codesign::Evaluation{-s, "", false};
  };
  codesign::BoConfig cfg;
  cfg.initial_design = initial;
  cfg.iterations = iterations;
  const auto bo = codesign::run_codesign(cfg, seed, f, false);
  const auto rs = codesign::random_search(cfg.bounds, initial + iterations, seed, f);
  for (std::size_t k = 0; k < kNumSegments; ++k)
    out.linf = std::max(out.linf, std::abs(bo.best.xi[k] - out.target[k]));
  out.bo_regret = -bo.best.f;
  out.rs_regret = -rs.best.f;
  return out;
}

}  // namespace legopt::oracle
