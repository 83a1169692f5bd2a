#pragma once

// Glue between the config, the trainer, the fitness evaluator and the files
// the CLI writes.

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "legopt/app/checkpoint.hpp"
#include "legopt/codesign/bo.hpp"
#include "legopt/codesign/experiments.hpp"
#include "legopt/ppo/trainer.hpp"

namespace legopt::app {

namespace fs = std::filesystem;

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline constexpr const char* kCurvesHeader =
    "epoch,mean_return,actor_loss,critic_loss,entropy,clip_frac,seconds";

inline std::string curves_csv(const std::vector<ppo::TrainStats>& stats) {
  std::ostringstream os;
  os << kCurvesHeader << "\n";
  for (const auto& s : stats)
    os << s.epoch << "," << fmt(s.mean_return) << "," << fmt(s.actor_loss) << ","
       << fmt(s.critic_loss) << "," << fmt(s.entropy) << "," << fmt(s.clip_frac) << ","
       << fmt(s.seconds) << "\n";
  return os.str();
}

inline ppo::TrainOptions train_options(const Config& c, std::uint64_t seed) {
  ppo::TrainOptions o;
  o.seed = seed;
  o.threads = c.run.threads;
  o.wall_clock = c.run.wall_clock;
  return o;
}

struct PretrainResult {
  Checkpoint checkpoint;
  std::vector<ppo::TrainStats> stats;
  double seconds = 0.0;
  int rebuilds = 0;
};

/// Fresh agent trained on a population in `dr` mode for c.ppo.epochs epochs
/// (or `epochs` when >= 0).
inline PretrainResult pretrain(const Config& c, sim::DrMode dr, ppo::RegMode reg,
                               std::uint64_t seed, int epochs = -1,
                               const ppo::EpochCallback& on_epoch = {}) {
  ppo::PpoConfig pc = c.ppo;
  pc.reg_mode = reg;
  if (epochs < 0) epochs = pc.epochs;
  const sim::EnvSetup setup = env_setup(c);
  Rng init(mix64(seed ^ 0x696e'6974'0000'0000ULL));
  PretrainResult r;
  r.checkpoint.agent = ppo::make_agent(pc, init);
  sim::Population pop(c.run.n_envs, dr, seed, setup.task, setup.sim, setup.morph);
  const auto t0 = std::chrono::steady_clock::now();
  r.stats = ppo::train(r.checkpoint.agent, pop, pc, epochs, train_options(c, seed), on_epoch);
  if (c.run.wall_clock)
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.rebuilds = pop.rebuilds();
  Config echo = c;
  echo.ppo.reg_mode = reg;
  echo.run.seed = seed;
  auto& m = r.checkpoint.meta;
  m.epochs = epochs;
  m.pretrain_epochs = epochs;
  m.seed = seed;
  m.reg_mode = ppo::reg_name(reg);
  m.dr_mode = sim::dr_name(dr);
  m.config_hash = config_hash(echo);
  m.config = result_config_json(echo);
  return r;
}

inline ppo::RegMode checkpoint_reg(const Checkpoint& ck) {
  return ppo::parse_reg(ck.meta.reg_mode);
}

struct FinetuneResult {
  Checkpoint checkpoint;
  std::vector<ppo::TrainStats> stats;
};

/// `steps` PPO epochs on n_envs identical robots at `xi`, starting from the
/// pretrained weights with fresh optimizer state. steps < 0 uses 10% of the
/// pretraining epochs (rounded up).
inline FinetuneResult finetune(const Config& c, const Checkpoint& pretrained,
                               const ScalingFactors& xi, int steps, std::uint64_t seed,
                               const ppo::EpochCallback& on_epoch = {}) {
  validate_factors(xi, bounds_of(c));
  if (steps < 0) steps = (pretrained.meta.pretrain_epochs + 9) / 10;
  ppo::PpoConfig pc = c.ppo;
  pc.reg_mode = checkpoint_reg(pretrained);
  FinetuneResult r;
  r.checkpoint = pretrained;
  r.stats = ppo::finetune(r.checkpoint.agent, xi, pc, steps, env_setup(c), c.run.n_envs,
                          train_options(c, seed), on_epoch);
  r.checkpoint.meta.epochs += steps;
  r.checkpoint.meta.finetuned_xi = xi;
  return r;
}

inline bool agent_finite(const ppo::Agent& a) {
  return all_finite(a.policy.mean.params().data(), a.policy.mean.params().size()) &&
         all_finite(a.critic.params().data(), a.critic.params().size()) &&
         a.policy.log_std.allFinite();
}

inline codesign::FitnessOptions fitness_options(const Config& c, std::uint64_t seed) {
  codesign::FitnessOptions fo;
  fo.n_envs = c.bo.fitness_envs;
  fo.steps = c.bo.fitness_steps;
  fo.seed = seed;
  fo.threads = c.run.threads;
  return fo;
}

inline std::string xi_tag(const ScalingFactors& xi) {
  std::string s = "xi";
  for (double v : xi.xi) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "_%.4f", v);
    s += buf;
  }
  return s;
}

/// Fine-tune + evaluate, as used inside the BO loop. A fine-tune that blows
/// up falls back to the pretrained policy and is flagged.
inline codesign::Evaluation finetune_and_evaluate(const Config& c, const Checkpoint& pretrained,
                                                  const ScalingFactors& xi, int steps,
                                                  std::uint64_t seed, const fs::path& ckpt_path,
                                                  Checkpoint* tuned_out = nullptr) {
  codesign::Evaluation e;
  Checkpoint tuned;
  bool ok = true;
  try {
    tuned = finetune(c, pretrained, xi, steps, seed).checkpoint;
    ok = agent_finite(tuned.agent);
  } catch (const NumericError&) {
    ok = false;
  }
  const sim::EnvSetup setup = env_setup(c);
  if (ok) {
    e.f = codesign::evaluate_fitness(tuned.agent, xi, setup, fitness_options(c, seed)).f;
    if (!ckpt_path.empty()) {
      save_checkpoint(ckpt_path, tuned);
      e.checkpoint = ckpt_path.generic_string();
    }
    if (tuned_out) *tuned_out = std::move(tuned);
  } else {
    e.f = codesign::evaluate_fitness(pretrained.agent, xi, setup, fitness_options(c, seed)).f;
    e.finetune_failed = true;
  }
  return e;
}

inline json record_to_json(const codesign::CandidateRecord& r) {
  return {{"iteration", r.iteration},       {"xi", r.xi.xi},
          {"f", r.f},                       {"checkpoint", r.checkpoint},
          {"seconds", r.seconds},           {"finetune_failed", r.finetune_failed}};
}

inline json codesign_report(const Config& c, const codesign::CodesignResult& res,
                            const std::string& pretrained_path) {
  json recs = json::array();
  for (const auto& r : res.records) recs.push_back(record_to_json(r));
  return {{"task", sim::task_name(c.task.kind)},
          {"seed", c.run.seed},
          {"pretrained_checkpoint", pretrained_path},
          {"config_hash", config_hash(c)},
          {"config", result_config_json(c)},
          {"best", record_to_json(res.best)},
          {"records", std::move(recs)}};
}

/// Structural check of a codesign report; returns an empty string when valid.
inline std::string check_codesign_report(const json& j) {
  auto is_record = [](const json& r) -> std::string {
    if (!r.is_object()) return "record is not an object";
    for (const char* k : {"iteration", "xi", "f", "checkpoint", "seconds", "finetune_failed"})
      if (!r.contains(k)) return std::string("record lacks '") + k + "'";
    if (!r["iteration"].is_number_integer()) return "iteration is not an integer";
    if (!r["xi"].is_array() || r["xi"].size() != kNumSegments) return "xi is not a 4-array";
    for (const auto& v : r["xi"])
      if (!v.is_number()) return "xi entry is not a number";
    if (!r["f"].is_number()) return "f is not a number";
    if (!r["checkpoint"].is_string()) return "checkpoint is not a string";
    if (!r["seconds"].is_number()) return "seconds is not a number";
    if (!r["finetune_failed"].is_boolean()) return "finetune_failed is not a boolean";
    return "";
  };
  if (!j.is_object()) return "report is not an object";
  for (const char* k : {"task", "seed", "config", "config_hash", "best", "records"})
    if (!j.contains(k)) return std::string("report lacks '") + k + "'";
  if (!j["records"].is_array() || j["records"].empty()) return "records is not a non-empty array";
  for (const auto& r : j["records"])
    if (auto e = is_record(r); !e.empty()) return e;
  if (auto e = is_record(j["best"]); !e.empty()) return "best: " + e;
  double max_f = -INFINITY;
  for (const auto& r : j["records"]) max_f = std::max(max_f, r["f"].get<double>());
  if (j["best"]["f"].get<double>() != max_f) return "best.f is not the maximum recorded fitness";
  return "";
}

// Matrix layout: rows are (xi0, xi1), columns (xi2, xi3), both in grid order.
// Failed cells are written as nan.
inline std::string heatmap_csv(const std::vector<codesign::HeatmapCell>& cells) {
  const std::size_t side = codesign::heatmap_side(cells.size());
  auto label = [](double a, double b) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f/%.4f", a, b);
    return std::string(buf);
  };
  std::ostringstream os;
  os << "xi0/xi1|xi2/xi3";
  for (std::size_t c = 0; c < side; ++c) os << "," << label(cells[c].xi.xi[2], cells[c].xi.xi[3]);
  os << "\n";
  for (std::size_t r = 0; r < side; ++r) {
    const auto& first = cells[r * side].xi.xi;
    os << label(first[0], first[1]);
    for (std::size_t c = 0; c < side; ++c) {
      const auto& cell = cells[r * side + c];
      os << "," << (cell.valid ? fmt(cell.f) : std::string("nan"));
    }
    os << "\n";
  }
  return os.str();
}

inline std::string trace_header() {
  std::string h = "step,x,z,pitch,q0,q1,q2,q3";
  for (const char* n : sim::RewardBreakdown::kNames) h += std::string(",") + n;
  return h + ",total";
}

inline std::string trace_row(const codesign::TraceRow& r) {
  std::ostringstream os;
  os << r.step << "," << fmt(r.body.x()) << "," << fmt(r.body.z()) << "," << fmt(r.body.pitch());
  for (std::size_t j = 0; j < kNumJoints; ++j) os << "," << fmt(r.body.q(j));
  for (double t : r.reward.terms()) os << "," << fmt(t);
  os << "," << fmt(r.reward.total);
  return os.str();
}

inline json fitness_to_json(const codesign::FitnessReport& r, const ScalingFactors& xi) {
  return {{"xi", xi.xi},
          {"f", r.f},
          {"returns", r.returns},
          {"lengths", r.lengths},
          {"success_fraction", r.success_fraction},
          {"divergence_fraction", r.divergence_fraction},
          {"failure_fraction", r.failure_fraction},
          {"mean_length", r.mean_length}};
}

inline json dr_report(const Config& c, const std::vector<codesign::ModeReport>& modes, int budget,
                      const std::vector<std::uint64_t>& seeds) {
  json jm = json::array();
  double spatial_seconds = 0.0;
  for (const auto& m : modes)
    if (m.mode == sim::DrMode::kSpatial) spatial_seconds = m.seconds;
  for (const auto& m : modes)
    jm.push_back({{"mode", sim::dr_name(m.mode)},
                  {"mean", m.mean},
                  {"std", m.std},
                  {"p_vs_spatial", m.p_vs_spatial},
                  {"seconds", m.seconds},
                  {"seconds_vs_spatial", spatial_seconds > 0.0 ? m.seconds / spatial_seconds : 0.0},
                  {"rebuilds", m.rebuilds},
                  {"seed_means", m.seed_means}});
  return {{"budget_epochs", budget},
          {"seeds", seeds},
          {"test_morphologies", c.experiments.dr_test_morphologies},
          {"config_hash", config_hash(c)},
          {"config", result_config_json(c)},
          {"modes", std::move(jm)}};
}

}  // namespace legopt::app
