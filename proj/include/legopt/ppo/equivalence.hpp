#pragma once

// Dual-run check that TD(0) with discount gamma equals TD(0) with a smaller
// discount gamma_reg once rewards are scaled by gamma_reg / gamma, the step
// size by gamma / gamma_reg, and the critic pays beta V(s)^2 with
// beta = (gamma_reg - gamma) / (2 gamma).

#include <algorithm>
#include <cmath>
#include <vector>

#include "legopt/nn/mlp.hpp"

namespace legopt::ppo {

struct Transition {
  nn::Vector s;
  nn::Vector s_next;
  double reward = 0.0;
};

/// Semi-gradient TD(0) step on a scalar value network:
///   params += alpha (scale r + gamma V(s') - V(s)) grad V(s) - alpha grad(beta V(s)^2)
inline void td0_value_update(nn::Mlp& net, const Transition& tr, double gamma, double alpha,
                             double reward_scale = 1.0, double beta = 0.0) {
  if (net.output_size() != 1) throw UsageError("td0_value_update needs a scalar value network");
  nn::Mlp::Cache cache;
  const double v = net.forward(tr.s, cache)(0, 0);
  const double v_next = net.forward(tr.s_next)(0, 0);
  const double delta = reward_scale * tr.reward + gamma * v_next - v;
  nn::ParamVector grad(net.params().size(), 0.0);
  net.backward(cache, nn::Matrix::Ones(1, 1), grad);
  const double coef = alpha * (delta - 2.0 * beta * v);
  auto& p = net.params();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] += coef * grad[i];
}

struct EquivalenceOptions {
  std::uint64_t seed = 0;
  int steps = 200;
  double gamma = 0.99;
  double gamma_reg = 0.9;
  double alpha = 0.01;
  int input_dim = 4;
  std::vector<int> hidden{16, 16};
  /// Negative control: use +(gamma - gamma_reg) / (2 gamma), the wrong sign.
  bool wrong_beta = false;
};

inline double regularizer_beta(double gamma, double gamma_reg) {
  return (gamma_reg - gamma) / (2.0 * gamma);
}

/// Max over steps of || phi_i - omega_i ||_inf between the plain run (phi)
/// and the regularized run (omega) driven by the same transition stream.
inline double equivalence_check(const EquivalenceOptions& o) {
  if (!(o.gamma_reg > 0.0 && o.gamma_reg < o.gamma && o.gamma < 1.0))
    throw ConfigError("equivalence check requires 0 < gamma_reg < gamma < 1");
  Rng rng(mix64(o.seed ^ 0x6571'7569'7661'6c65ULL));
  std::vector<int> sizes{o.input_dim};
  sizes.insert(sizes.end(), o.hidden.begin(), o.hidden.end());
  sizes.push_back(1);
  nn::Mlp phi(sizes, nn::Activation::kTanh);
  phi.init(rng, 1.0);
  nn::Mlp omega = phi;

  const double scale = o.gamma_reg / o.gamma;
  const double alpha_reg = o.gamma / o.gamma_reg * o.alpha;
  const double beta = o.wrong_beta ? (o.gamma - o.gamma_reg) / (2.0 * o.gamma)
                                   : regularizer_beta(o.gamma, o.gamma_reg);
  double worst = 0.0;
  for (int i = 0; i < o.steps; ++i) {
    Transition tr{nn::Vector(o.input_dim), nn::Vector(o.input_dim), normal01(rng)};
    for (int k = 0; k < o.input_dim; ++k) tr.s[k] = normal01(rng);
    for (int k = 0; k < o.input_dim; ++k) tr.s_next[k] = normal01(rng);
    td0_value_update(phi, tr, o.gamma, o.alpha);
    td0_value_update(omega, tr, o.gamma_reg, alpha_reg, scale, beta);
    for (std::size_t k = 0; k < phi.params().size(); ++k)
      worst = std::max(worst, std::abs(phi.params()[k] - omega.params()[k]));
  }
  return worst;
}

}  // namespace legopt::ppo
