#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "legopt/nn/mlp.hpp"

namespace legopt::nn {

/// Diagonal Gaussian policy: mean from an MLP, state-independent log std.
struct GaussianPolicy {
  Mlp mean;
  Vector log_std;

  GaussianPolicy() = default;
  GaussianPolicy(Mlp net, double init_log_std)
      : mean(std::move(net)), log_std(Vector::Constant(mean.output_size(), init_log_std)) {}

  int action_dim() const { return mean.output_size(); }

  /// log N(action | mean, diag(exp(log_std))^2) for every column of the batch.
  Vector log_prob_from_mean(const Matrix& mu, const Matrix& actions) const {
    const Vector inv_std = (-log_std).array().exp();
    const double log_norm = log_std.sum() + 0.5 * action_dim() * std::log(2.0 * std::numbers::pi);
    Vector out(mu.cols());
    for (Eigen::Index c = 0; c < mu.cols(); ++c) {
      const Vector z = (actions.col(c) - mu.col(c)).cwiseProduct(inv_std);
      out[c] = -0.5 * z.squaredNorm() - log_norm;
    }
    return out;
  }

  Vector log_prob(const Matrix& obs, const Matrix& actions) const {
    return log_prob_from_mean(mean.forward(obs), actions);
  }

  double entropy() const {
    return log_std.sum() + 0.5 * action_dim() * (1.0 + std::log(2.0 * std::numbers::pi));
  }
};

inline double gaussian_logprob(const GaussianPolicy& p, const Vector& obs, const Vector& action) {
  return p.log_prob(obs, action)[0];
}

}  // namespace legopt::nn
