#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "legopt/app/config.hpp"
#include "legopt/ppo/agent.hpp"

namespace legopt::app {

inline constexpr int kCheckpointVersion = 1;

struct CheckpointMeta {
  int epochs = 0;           // PPO epochs behind these weights, fine-tuning included
  int pretrain_epochs = 0;  // epochs of the pretraining run this descends from
  std::uint64_t seed = 0;
  std::string reg_mode = "normal";
  std::string dr_mode = "none";
  std::string config_hash;
  std::optional<ScalingFactors> finetuned_xi;
  json config;  // effective config of the producing run
};

struct Checkpoint {
  ppo::Agent agent;
  CheckpointMeta meta;
};

inline json checkpoint_to_json(const Checkpoint& c) {
  const auto& a = c.agent;
  json meta = {{"epochs", c.meta.epochs},
               {"pretrain_epochs", c.meta.pretrain_epochs},
               {"seed", c.meta.seed},
               {"reg_mode", c.meta.reg_mode},
               {"dr_mode", c.meta.dr_mode},
               {"config_hash", c.meta.config_hash},
               {"config", c.meta.config}};
  meta["finetuned_xi"] = c.meta.finetuned_xi ? json(c.meta.finetuned_xi->xi) : json(nullptr);
  return {{"version", kCheckpointVersion},
          {"architecture",
           {{"actor_sizes", a.policy.mean.sizes()},
            {"critic_sizes", a.critic.sizes()},
            {"activation", nn::activation_name(a.policy.mean.activation())}}},
          {"actor", nn::save_weights(a.policy.mean)},
          {"log_std", std::vector<double>(a.policy.log_std.data(),
                                          a.policy.log_std.data() + a.policy.log_std.size())},
          {"critic", nn::save_weights(a.critic)},
          {"normalizers", {{"actor", a.actor_norm.to_json()}, {"critic", a.critic_norm.to_json()}}},
          {"metadata", std::move(meta)}};
}

inline Checkpoint checkpoint_from_json(const json& j) {
  try {
    if (!j.is_object() || !j.contains("version")) throw FormatError("checkpoint has no version field");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion)
      throw FormatError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                        std::to_string(kCheckpointVersion) + ")");
    const auto& arch = j.at("architecture");
    const auto actor_sizes = arch.at("actor_sizes").get<std::vector<int>>();
    const auto critic_sizes = arch.at("critic_sizes").get<std::vector<int>>();
    if (actor_sizes.empty() || actor_sizes.front() != static_cast<int>(sim::kActorDim) ||
        actor_sizes.back() != static_cast<int>(sim::kActionDim))
      throw FormatError("actor shape " + nn::shape_string(actor_sizes) + " does not fit the " +
                        std::to_string(sim::kActorDim) + " -> " + std::to_string(sim::kActionDim) +
                        " observation/action layout");
    if (critic_sizes.empty() || critic_sizes.front() != static_cast<int>(sim::kCriticDim) ||
        critic_sizes.back() != 1)
      throw FormatError("critic shape " + nn::shape_string(critic_sizes) + " does not fit the " +
                        std::to_string(sim::kCriticDim) + " -> 1 layout");
    Checkpoint c;
    c.agent.policy.mean = nn::load_weights(j.at("actor"), actor_sizes);
    c.agent.critic = nn::load_weights(j.at("critic"), critic_sizes);
    const auto log_std = j.at("log_std").get<std::vector<double>>();
    if (log_std.size() != sim::kActionDim)
      throw FormatError("log_std has " + std::to_string(log_std.size()) + " entries, expected " +
                        std::to_string(sim::kActionDim));
    c.agent.policy.log_std = Eigen::Map<const nn::Vector>(log_std.data(), static_cast<Eigen::Index>(log_std.size()));
    const auto& norms = j.at("normalizers");
    c.agent.actor_norm = ppo::RunningNormalizer::from_json(norms.at("actor"), static_cast<int>(sim::kActorDim));
    c.agent.critic_norm = ppo::RunningNormalizer::from_json(norms.at("critic"), static_cast<int>(sim::kCriticDim));
    const auto& m = j.at("metadata");
    c.meta.epochs = m.at("epochs").get<int>();
    c.meta.pretrain_epochs = m.at("pretrain_epochs").get<int>();
    c.meta.seed = m.at("seed").get<std::uint64_t>();
    c.meta.reg_mode = m.at("reg_mode").get<std::string>();
    c.meta.dr_mode = m.at("dr_mode").get<std::string>();
    c.meta.config_hash = m.at("config_hash").get<std::string>();
    c.meta.config = m.at("config");
    if (!m.at("finetuned_xi").is_null()) {
      ScalingFactors xi;
      xi.xi = m.at("finetuned_xi").get<std::array<double, kNumSegments>>();
      c.meta.finetuned_xi = xi;
    }
    return c;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + p.string() + "'");
}

inline void save_checkpoint(const std::filesystem::path& p, const Checkpoint& c) {
  write_text(p, checkpoint_to_json(c).dump(1) + "\n");
}

/// A missing file is a usage problem; a present but broken one a format error.
inline Checkpoint load_checkpoint(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw UsageError("cannot open checkpoint '" + p.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("checkpoint '" + p.string() + "' is not valid JSON (truncated?): " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace legopt::app
