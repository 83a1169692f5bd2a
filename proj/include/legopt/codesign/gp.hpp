#pragma once

// Gaussian-process regression with an isotropic RBF kernel. Targets are
// standardized internally; the lengthscale comes from a small grid search on
// the log marginal likelihood and the amplitude from its closed-form optimum.

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "legopt/common.hpp"

namespace legopt::codesign {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct GpHyper {
  std::vector<double> lengthscale_grid{0.1, 0.2, 0.4, 0.8};
  double jitter_rel = 1e-6;  // noise variance as a fraction of the amplitude
  // Fixed hyperparameters skip the search when both are > 0.
  double fixed_lengthscale = 0.0;
  double fixed_amplitude = 0.0;
};

struct GpSurrogate {
  Mat X;  // one observation per row
  Vec y;  // raw targets
  double y_mean = 0.0;
  double y_std = 1.0;
  double lengthscale = 0.0;
  double amplitude = 1.0;  // signal variance in standardized units
  double noise = 0.0;      // jitter variance in standardized units
  Eigen::LLT<Mat> chol;
  Vec alpha;  // (K + noise I)^-1 y_standardized
  double log_marginal = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(X.rows()); }
};

inline double rbf(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b, double ell) {
  return std::exp(-0.5 * (a - b).squaredNorm() / (ell * ell));
}

namespace detail {

inline Mat unit_kernel(const Mat& X, double ell) {
  const auto n = X.rows();
  Mat K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) K(i, j) = K(j, i) = rbf(X.row(i).transpose(), X.row(j).transpose(), ell);
  }
  return K;
}

// Factorizes amp * (R + rel I) and fills the posterior weights. With the
// amplitude profiled out, amp = z^T (R + rel I)^-1 z / n.
inline bool factorize(GpSurrogate& g, const Vec& z, double ell, double amp, double rel) {
  const auto n = g.X.rows();
  Mat K = unit_kernel(g.X, ell);
  K.diagonal().array() += rel;
  Eigen::LLT<Mat> llt(K);
  if (llt.info() != Eigen::Success) return false;
  const Vec w = llt.solve(z);
  if (amp <= 0.0) amp = std::max(z.dot(w) / static_cast<double>(n), 1e-12);
  const double logdet_unit = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  g.lengthscale = ell;
  g.amplitude = amp;
  g.noise = rel * amp;
  g.alpha = w / amp;
  g.log_marginal = -0.5 * z.dot(w) / amp - 0.5 * (logdet_unit + n * std::log(amp)) -
                   0.5 * n * std::log(2.0 * M_PI);
  K *= amp;
  g.chol.compute(K);
  return g.chol.info() == Eigen::Success;
}

}  // namespace detail

inline GpSurrogate gp_fit(const Mat& X, const Vec& y, const GpHyper& h = {}) {
  if (X.rows() < 1) throw DataError("gp_fit needs at least one observation");
  if (X.rows() != y.size()) throw DataError("gp_fit: X and y sizes differ");
  if (!y.allFinite() || !X.allFinite()) throw DataError("gp_fit: non-finite observation");
  GpSurrogate g;
  g.X = X;
  g.y = y;
  g.y_mean = y.mean();
  const double var = (y.array() - g.y_mean).square().sum() / static_cast<double>(y.size());
  g.y_std = var > 1e-24 ? std::sqrt(var) : 1.0;
  const Vec z = (y.array() - g.y_mean) / g.y_std;

  if (h.fixed_lengthscale > 0.0 && h.fixed_amplitude > 0.0) {
    if (!detail::factorize(g, z, h.fixed_lengthscale, h.fixed_amplitude, h.jitter_rel))
      throw NumericError("gp_fit: kernel matrix not positive definite");
    return g;
  }
  GpSurrogate best;
  double best_lml = -std::numeric_limits<double>::infinity();
  for (double ell : h.lengthscale_grid) {
    GpSurrogate cand = g;
    if (!detail::factorize(cand, z, ell, 0.0, h.jitter_rel)) continue;
    if (cand.log_marginal > best_lml) {
      best_lml = cand.log_marginal;
      best = std::move(cand);
    }
  }
  if (!std::isfinite(best_lml)) throw NumericError("gp_fit: no lengthscale gave a valid factorization");
  return best;
}

struct GpPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Posterior in the original units of y.
inline GpPrediction gp_predict(const GpSurrogate& g, const Eigen::Ref<const Vec>& x) {
  const auto n = g.X.rows();
  Vec k(n);
  for (Eigen::Index i = 0; i < n; ++i) k[i] = g.amplitude * rbf(g.X.row(i).transpose(), x, g.lengthscale);
  const double mean_z = k.dot(g.alpha);
  const Vec v = g.chol.matrixL().solve(k);
  const double var_z = std::max(0.0, g.amplitude - v.squaredNorm());
  return {g.y_mean + g.y_std * mean_z, g.y_std * g.y_std * var_z};
}

}  // namespace legopt::codesign
