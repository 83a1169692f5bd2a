#pragma once

// Dense multilayer perceptron with hand-derived reverse-mode gradients.
// Parameters live in one flat array: for each layer, the weight matrix
// (n_out x n_in, row-major) followed by the bias vector (n_out).

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "legopt/common.hpp"

namespace legopt::nn {

using Matrix = Eigen::MatrixXd;  // column = one sample
using Vector = Eigen::VectorXd;
// Parameter and gradient storage. Eigen's vectorized kernels peel a scalar
// prologue up to the first aligned element, so the rounding of a product over
// mapped memory depends on where the buffer lands. Aligning every buffer makes
// results independent of the allocator.
using ParamVector = std::vector<double, Eigen::aligned_allocator<double>>;
using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMajorMutMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

enum class Activation { kTanh, kRelu, kIdentity };

inline const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
    case Activation::kIdentity: return "identity";
  }
  return "?";
}

inline Activation parse_activation(const std::string& s) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "relu") return Activation::kRelu;
  if (s == "identity") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + s + "'");
}

inline std::string shape_string(const std::vector<int>& sizes) {
  std::string s = "[";
  for (std::size_t i = 0; i < sizes.size(); ++i) s += (i ? "," : "") + std::to_string(sizes[i]);
  return s + "]";
}

class Mlp {
 public:
  /// Per-layer post-activation outputs, acts[0] being the input batch.
  struct Cache {
    std::vector<Matrix> acts;
  };

  Mlp() = default;
  Mlp(std::vector<int> sizes, Activation act = Activation::kTanh)
      : sizes_(std::move(sizes)), act_(act) {
    if (sizes_.size() < 2) throw ConfigError("an MLP needs at least input and output sizes");
    for (int s : sizes_)
      if (s < 1) throw ConfigError("MLP layer sizes must be >= 1");
    params_.assign(param_count(sizes_), 0.0);
  }

  static std::size_t param_count(const std::vector<int>& sizes) {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
      n += static_cast<std::size_t>(sizes[l] + 1) * static_cast<std::size_t>(sizes[l + 1]);
    return n;
  }

  const std::vector<int>& sizes() const { return sizes_; }
  Activation activation() const { return act_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::size_t num_layers() const { return sizes_.size() - 1; }
  ParamVector& params() { return params_; }
  const ParamVector& params() const { return params_; }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases; the last
  /// layer's weights are further multiplied by `output_gain`.
  void init(Rng& rng, double output_gain = 1.0) {
    std::size_t off = 0;
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const int nin = sizes_[l], nout = sizes_[l + 1];
      const double bound = 1.0 / std::sqrt(static_cast<double>(nin));
      const double gain = l + 1 == num_layers() ? output_gain : 1.0;
      for (int i = 0; i < nin * nout; ++i) params_[off++] = gain * uniform(rng, -bound, bound);
      for (int i = 0; i < nout; ++i) params_[off++] = 0.0;
    }
  }

  Matrix forward(const Matrix& x) const {
    Cache unused;
    return forward(x, unused, false);
  }

  Matrix forward(const Matrix& x, Cache& cache, bool keep = true) const {
    if (x.rows() != input_size())
      throw UsageError("MLP input has " + std::to_string(x.rows()) + " rows, expected " +
                       std::to_string(input_size()));
    if (keep) {
      cache.acts.resize(sizes_.size());
      cache.acts[0] = x;
    }
    Matrix a = x;
    std::size_t off = 0;
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const int nin = sizes_[l], nout = sizes_[l + 1];
      RowMajorMap W(params_.data() + off, nout, nin);
      off += static_cast<std::size_t>(nin * nout);
      Eigen::Map<const Vector> b(params_.data() + off, nout);
      off += static_cast<std::size_t>(nout);
      Matrix z = W * a;
      z.colwise() += b;
      if (l + 1 < num_layers()) apply_activation(z);
      a = std::move(z);
      if (keep) cache.acts[l + 1] = a;
    }
    return a;
  }

  /// Accumulates dL/dparams into `grad` (same layout as params) and returns
  /// dL/dinput, given dL/doutput for the batch held in `cache`.
  Matrix backward(const Cache& cache, const Matrix& dout, std::span<double> grad) const {
    if (grad.size() != params_.size()) throw UsageError("gradient buffer has wrong size");
    if (cache.acts.size() != sizes_.size()) throw UsageError("backward needs a forward cache");
    std::vector<std::size_t> offsets(num_layers());
    std::size_t off = 0;
    for (std::size_t l = 0; l < num_layers(); ++l) {
      offsets[l] = off;
      off += static_cast<std::size_t>((sizes_[l] + 1) * sizes_[l + 1]);
    }
    Matrix delta = dout;
    for (std::size_t l = num_layers(); l-- > 0;) {
      const int nin = sizes_[l], nout = sizes_[l + 1];
      if (l + 1 < num_layers()) apply_activation_grad(cache.acts[l + 1], delta);
      RowMajorMutMap gW(grad.data() + offsets[l], nout, nin);
      Eigen::Map<Vector> gb(grad.data() + offsets[l] + static_cast<std::size_t>(nin * nout), nout);
      gW.noalias() += delta * cache.acts[l].transpose();
      gb.noalias() += delta.rowwise().sum();
      RowMajorMap W(params_.data() + offsets[l], nout, nin);
      Matrix next = W.transpose() * delta;
      delta = std::move(next);
    }
    return delta;
  }

  bool operator==(const Mlp& o) const {
    return sizes_ == o.sizes_ && act_ == o.act_ && params_ == o.params_;
  }

 private:
  void apply_activation(Matrix& z) const {
    switch (act_) {
      case Activation::kTanh: z = z.array().tanh().matrix(); break;
      case Activation::kRelu: z = z.cwiseMax(0.0); break;
      case Activation::kIdentity: break;
    }
  }

  // delta *= f'(z), expressed through the activation output a = f(z).
  void apply_activation_grad(const Matrix& a, Matrix& delta) const {
    switch (act_) {
      case Activation::kTanh: delta.array() *= (1.0 - a.array().square()); break;
      case Activation::kRelu: delta.array() *= (a.array() > 0.0).cast<double>(); break;
      case Activation::kIdentity: break;
    }
  }

  std::vector<int> sizes_;
  Activation act_ = Activation::kTanh;
  ParamVector params_;
};

inline nlohmann::json save_weights(const Mlp& net) {
  return {{"sizes", net.sizes()},
          {"activation", activation_name(net.activation())},
          {"params", net.params()}};
}

/// Rebuilds a network from save_weights() output. When `expected_sizes` is
/// non-empty the stored shape must match it.
inline Mlp load_weights(const nlohmann::json& j, const std::vector<int>& expected_sizes = {}) {
  try {
    const auto sizes = j.at("sizes").get<std::vector<int>>();
    if (!expected_sizes.empty() && sizes != expected_sizes)
      throw FormatError("network shape mismatch: checkpoint has " + shape_string(sizes) +
                        ", expected " + shape_string(expected_sizes));
    Mlp net(sizes, parse_activation(j.at("activation").get<std::string>()));
    const auto& arr = j.at("params");
    if (!arr.is_array() || arr.size() != net.params().size())
      throw FormatError("network " + shape_string(sizes) + " expects " +
                        std::to_string(net.params().size()) + " parameters, found " +
                        std::to_string(arr.is_array() ? arr.size() : 0));
    for (std::size_t i = 0; i < arr.size(); ++i) net.params()[i] = arr[i].get<double>();
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed network block: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("invalid network block: ") + e.what());
  }
}

}  // namespace legopt::nn
