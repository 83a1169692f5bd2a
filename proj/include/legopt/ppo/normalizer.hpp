#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "json.hpp"
#include "legopt/common.hpp"

namespace legopt::ppo {

/// Running per-feature mean/variance (parallel-batch merge) used to whiten
/// network inputs.
class RunningNormalizer {
 public:
  RunningNormalizer() = default;
  RunningNormalizer(int dim, double clip)
      : mean_(Eigen::VectorXd::Zero(dim)), var_(Eigen::VectorXd::Ones(dim)), clip_(clip) {}

  int dim() const { return static_cast<int>(mean_.size()); }
  double count() const { return count_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& var() const { return var_; }

  /// Columns of `batch` are samples.
  void update(const Eigen::MatrixXd& batch) {
    const double n = static_cast<double>(batch.cols());
    if (n == 0) return;
    const Eigen::VectorXd bmean = batch.rowwise().mean();
    const Eigen::VectorXd bvar =
        (batch.colwise() - bmean).array().square().rowwise().sum().matrix() / n;
    const double total = count_ + n;
    const Eigen::VectorXd delta = bmean - mean_;
    const Eigen::VectorXd m2 = var_ * count_ + bvar * n + delta.cwiseProduct(delta) * count_ * n / total;
    mean_ += delta * n / total;
    var_ = m2 / total;
    count_ = total;
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    const Eigen::VectorXd inv = (var_.array() + 1e-8).sqrt().inverse();
    Eigen::MatrixXd out = (x.colwise() - mean_).array().colwise() * inv.array();
    return out.cwiseMax(-clip_).cwiseMin(clip_);
  }

  nlohmann::json to_json() const {
    return {{"count", count_},
            {"clip", clip_},
            {"mean", std::vector<double>(mean_.data(), mean_.data() + mean_.size())},
            {"var", std::vector<double>(var_.data(), var_.data() + var_.size())}};
  }

  static RunningNormalizer from_json(const nlohmann::json& j, int expected_dim) {
    RunningNormalizer n;
    const auto mean = j.at("mean").get<std::vector<double>>();
    const auto var = j.at("var").get<std::vector<double>>();
    if (static_cast<int>(mean.size()) != expected_dim || var.size() != mean.size())
      throw FormatError("normalizer has " + std::to_string(mean.size()) + " features, expected " +
                        std::to_string(expected_dim));
    n.mean_ = Eigen::Map<const Eigen::VectorXd>(mean.data(), expected_dim);
    n.var_ = Eigen::Map<const Eigen::VectorXd>(var.data(), expected_dim);
    n.count_ = j.at("count").get<double>();
    n.clip_ = j.at("clip").get<double>();
    return n;
  }

  bool operator==(const RunningNormalizer& o) const {
    return mean_ == o.mean_ && var_ == o.var_ && count_ == o.count_ && clip_ == o.clip_;
  }

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd var_;
  double count_ = 0.0;
  double clip_ = 5.0;
};

}  // namespace legopt::ppo
