// Acceptance runner: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance --only 7   run a subset (comma separated)
//
// Expensive training results are cached under ./acceptance_runs so that the
// criteria sharing a pretrained policy do not retrain it.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <set>

#include "cli_util.hpp"
#include "legopt/app/pipeline.hpp"
#include "legopt/ppo/equivalence.hpp"
#include "oracles.hpp"

namespace {

using namespace legopt;
using namespace legopt::testing;
using app::json;
using Clock = std::chrono::steady_clock;

// ---- pinned tolerances and budgets ----------------------------------------
constexpr double kEquivTol = 1e-8;
constexpr double kEquivControlMin = 1e-3;
constexpr double kEquivSeconds = 5.0;
constexpr int kGaeBuffers = 1000;
constexpr double kGaeTol = 1e-9;
constexpr double kGaeLambdaOneTol = 1e-12;  // relative; summation order differs
constexpr int kGradPairs = 100;
constexpr double kGradTol = 1e-5;
constexpr double kMorphTol = 1e-12;
constexpr double kEnergyDrift = 0.01;   // per simulated second
constexpr double kFreeFallTol = 1e-3;   // m/s after 0.1 s
constexpr int kDrSeeds = 5;
constexpr int kDrEpochs = 300;
constexpr std::size_t kDrTests = 100;
constexpr double kDrAlpha = 0.05;
constexpr int kExpectedRebuilds = 80;
constexpr int kScratchEpochs = 300;
constexpr int kFinetuneEpochs = 30;  // 10% of the scratch budget
constexpr double kReachFrac = 0.90;
constexpr double kAgreeFrac = 0.05;
constexpr int kBoSeeds = 10;
constexpr int kBoHits = 9;
constexpr double kBoLinf = 0.05;
constexpr double kBoSeconds = 60.0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string f3(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

const fs::path kWork = fs::current_path() / "acceptance_runs";

// Desk-scale training config shared by criteria 7, 8 and 10: 256 envs and 300
// epochs as specified, 64x64 networks so one run fits in a few minutes on a
// single core.
app::Config desk_config() {
  return app::config_from_json({{"ppo",
                                 {{"actor_hidden", {64, 64}},
                                  {"critic_hidden", {64, 64}},
                                  {"minibatch_size", 1536},
                                  {"epochs", kDrEpochs}}},
                                {"run", {{"n_envs", 256}, {"out_dir", (kWork / "out").string()}}}});
}

/// Spatial-DR pretraining for `seed`, cached on disk.
app::PretrainResult spatial_pretrain(const app::Config& c, std::uint64_t seed) {
  const fs::path p = kWork / ("pretrain_spatial_seed" + std::to_string(seed) + ".checkpoint.json");
  if (fs::exists(p)) {
    app::Checkpoint ck = app::load_checkpoint(p);
    if (ck.meta.config_hash == app::config_hash([&] {
          app::Config e = c;
          e.run.seed = seed;
          return e;
        }()) &&
        ck.meta.pretrain_epochs == c.ppo.epochs) {
      std::fprintf(stderr, "  reusing %s\n", p.c_str());
      app::PretrainResult r;
      r.checkpoint = std::move(ck);
      return r;
    }
  }
  std::fprintf(stderr, "  pretraining spatial seed %lu\n", static_cast<unsigned long>(seed));
  app::PretrainResult r = app::pretrain(c, sim::DrMode::kSpatial, c.ppo.reg_mode, seed);
  app::save_checkpoint(p, r.checkpoint);
  return r;
}

// ---- 1 ----------------------------------------------------------------------
Outcome equivalence() {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    ppo::EquivalenceOptions o;
    o.seed = s;
    worst = std::max(worst, ppo::equivalence_check(o));
  }
  ppo::EquivalenceOptions wrong;
  wrong.wrong_beta = true;
  const double control = ppo::equivalence_check(wrong);
  const auto t0 = Clock::now();
  const int rc = run_cli("verify-equivalence --gamma 0.99 --gamma-reg 0.9 --steps 200 --seeds 10");
  const double secs = seconds_since(t0);
  const int rc_wrong = run_cli("verify-equivalence --seeds 1 --wrong-beta");
  Outcome o;
  o.pass = worst <= kEquivTol && control > kEquivControlMin && rc == 0 && rc_wrong == 1 &&
           secs < kEquivSeconds;
  o.detail = "max dev " + f3(worst) + " (<= " + f3(kEquivTol) + "), wrong-beta " + f3(control) +
             " (> " + f3(kEquivControlMin) + "), CLI exit " + std::to_string(rc) + "/" +
             std::to_string(rc_wrong) + ", " + f3(secs) + " s (< 5 s)";
  return o;
}

// ---- 2 ----------------------------------------------------------------------
Outcome gae() {
  Rng rng(2);
  double worst = 0.0, worst_l1 = 0.0;
  bool l0_exact = true;
  for (int b = 0; b < kGaeBuffers; ++b) {
    const std::size_t T = 1 + uniform_index(rng, 64), envs = 1 + uniform_index(rng, 4);
    std::vector<double> r, v, boot;
    std::vector<unsigned char> d;
    for (std::size_t i = 0; i < T * envs; ++i) {
      r.push_back(normal01(rng));
      v.push_back(normal01(rng));
      d.push_back(uniform01(rng) < 0.1 ? 1 : 0);
    }
    for (std::size_t e = 0; e < envs; ++e) boot.push_back(normal01(rng));
    const double gamma = uniform(rng, 0.8, 0.999), lambda = uniform(rng, 0.0, 1.0);
    const auto fast = ppo::compute_gae(r, v, d, boot, envs, gamma, lambda);
    const auto slow = oracle::gae_bruteforce(r, v, d, boot, envs, gamma, lambda);
    for (std::size_t i = 0; i < slow.size(); ++i) worst = std::max(worst, std::abs(fast.advantages[i] - slow[i]));

    // lambda = 0: the one-step TD error, bit for bit.
    const auto g0 = ppo::compute_gae(r, v, d, boot, envs, gamma, 0.0);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t e = 0; e < envs; ++e) {
        const std::size_t i = t * envs + e;
        const double next = d[i] ? 0.0 : (t + 1 < T ? v[i + envs] : boot[e]);
        if (g0.advantages[i] != r[i] + gamma * next - v[i]) l0_exact = false;
      }
    // lambda = 1: targets are discounted Monte-Carlo returns.
    const auto g1 = ppo::compute_gae(r, v, d, boot, envs, gamma, 1.0);
    for (std::size_t e = 0; e < envs; ++e)
      for (std::size_t t = 0; t < T; ++t) {
        double ret = 0.0, w = 1.0;
        std::size_t k = t;
        for (; k < T; ++k) {
          ret += w * r[k * envs + e];
          if (d[k * envs + e]) break;
          w *= gamma;
        }
        if (k == T) ret += w * boot[e];
        const double tgt = g1.targets[t * envs + e];
        worst_l1 = std::max(worst_l1, std::abs(tgt - ret) / std::max(1.0, std::abs(ret)));
      }
  }
  Outcome o;
  o.pass = worst <= kGaeTol && l0_exact && worst_l1 <= kGaeLambdaOneTol;
  o.detail = std::to_string(kGaeBuffers) + " buffers, max |fast - brute| " + f3(worst) + " (<= " +
             f3(kGaeTol) + "), lambda=0 bitwise " + (l0_exact ? "yes" : "NO") +
             ", lambda=1 rel err " + f3(worst_l1);
  return o;
}

// ---- 3 ----------------------------------------------------------------------
Outcome gradients() {
  Rng rng(3);
  double worst = 0.0;
  for (int k = 0; k < kGradPairs; ++k) {
    std::vector<int> sizes{1 + static_cast<int>(uniform_index(rng, 12))};
    const std::size_t hidden = 1 + uniform_index(rng, 3);
    for (std::size_t h = 0; h < hidden; ++h) sizes.push_back(1 + static_cast<int>(uniform_index(rng, 16)));
    sizes.push_back(1 + static_cast<int>(uniform_index(rng, 4)));
    nn::Mlp net(sizes, nn::Activation::kTanh);
    net.init(rng);
    for (double& p : net.params()) p += uniform(rng, -0.2, 0.2);
    const int batch = 1 + static_cast<int>(uniform_index(rng, 4));
    nn::Matrix x(sizes.front(), batch), w(sizes.back(), batch);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = uniform(rng, -2.0, 2.0);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = uniform(rng, -1.0, 1.0);
    worst = std::max(worst, oracle::gradient_check(net, x, w));
  }
  return {worst <= kGradTol, std::to_string(kGradPairs) + " tanh nets, max rel err " + f3(worst) +
                                 " (<= " + f3(kGradTol) + ")"};
}

// ---- 4 ----------------------------------------------------------------------
Outcome morphology() {
  const BaseRobotSpec spec;
  double worst = 0.0;
  for (const auto& g : spec.links)
    for (int step = 0; step <= 16; ++step) {
      const double xi = std::min(1.4, 0.6 + 0.05 * step);
      const ScaledLink s = scale_link(g, xi);
      const double L = g.length * xi, m = g.mass * xi, b = g.width;
      worst = std::max({worst, std::abs(s.mass - m), std::abs(s.ixx - m * (b * b + L * L) / 12.0),
                        std::abs(s.iyy - m * (b * b + L * L) / 12.0),
                        std::abs(s.izz - m * (2 * b * b) / 12.0), std::abs(s.origin_z + L / 2.0)});
    }
  const RobotModel id = build_robot(spec, ScalingFactors::identity(), {}, spec.gains);
  const bool bitwise = id == base_model(spec) && std::memcmp(&id.pd, &spec.gains, sizeof(PdGains)) == 0;
  bool eta_id = true;
  for (int step = 0; step <= 80; ++step) {
    const double xi = std::min(1.4, 0.6 + 0.01 * step);
    eta_id = eta_id && pd_correction({}, xi) == xi;
  }
  Outcome o;
  o.pass = worst <= kMorphTol && bitwise && eta_id;
  o.detail = "cuboid max err " + f3(worst) + " (<= " + f3(kMorphTol) + "), identity bitwise " +
             (bitwise ? "yes" : "NO") + ", eta identity " + (eta_id ? "yes" : "NO");
  return o;
}

// ---- 5 ----------------------------------------------------------------------
Outcome physics() {
  const BaseRobotSpec spec;
  const RobotModel m = build_robot(spec, {}, {}, spec.gains);
  sim::PhysicsParams p;
  p.contacts = false;
  p.joint_limits = false;
  p.joint_damping = 0.0;
  const sim::Joints nominal = sim::SimConfig{}.nominal_q;
  auto pose = [&](double z) {
    sim::BodyState b;
    b.pos[1] = z;
    for (std::size_t j = 0; j < kNumJoints; ++j) b.pos[3 + static_cast<int>(j)] = nominal[j];
    return b;
  };
  const double dt = 0.005;
  // Energy: swinging legs, with and without gravity, over 1 s.
  double drift = 0.0;
  for (double gravity : {0.0, 9.81}) {
    p.gravity = gravity;
    sim::BodyState s = pose(3.0);
    s.vel << 0.3, 0.0, 0.8, 2.0, -3.0, -1.5, 2.5;
    const double e0 = sim::mechanical_energy(m, s, p);
    double ke_max = sim::kinetic_energy(m, s, p.armature), worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      s = sim::physics_step(m, s, {}, dt, sim::Terrain{}, p);
      ke_max = std::max(ke_max, sim::kinetic_energy(m, s, p.armature));
      worst = std::max(worst, std::abs(sim::mechanical_energy(m, s, p) - e0));
    }
    drift = std::max(drift, worst / ke_max);
  }
  // Free fall for 0.1 s.
  p.gravity = 9.81;
  sim::BodyState s = pose(2.0);
  for (int i = 0; i < 20; ++i) s = sim::physics_step(m, s, {}, dt, sim::Terrain{}, p);
  const double v_err = std::abs(s.vel[1] - (-9.81 * 0.1));
  Outcome o;
  o.pass = drift <= kEnergyDrift && v_err <= kFreeFallTol;
  o.detail = "energy drift " + f3(100 * drift) + "% of peak kinetic energy over 1 s (<= 1%), free-fall |dv| " +
             f3(v_err) + " m/s (<= " + f3(kFreeFallTol) + ")";
  return o;
}

// ---- 6 ----------------------------------------------------------------------
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
  return files;
}

Outcome determinism() {
  const fs::path dir = scratch_dir("determinism");
  const fs::path out = dir / "out", cfg = dir / "config.json";
  json j = tiny_config(out);
  j["run"]["n_envs"] = 12;
  j["ppo"]["epochs"] = 3;
  j["experiments"] = {{"dr_test_morphologies", 3}, {"dr_eval_envs", 2}};
  write_file(cfg, j.dump());
  const std::string base = "--config " + cfg.string() + " --seed 11 ";
  const fs::path ck = out / "pretrain_spatial_d_reg.checkpoint.json";
  const std::vector<std::string> commands{
      "pretrain --dr spatial --reg d_reg",
      "finetune --checkpoint " + ck.string() + " --xi 0.7 1.3 1.1 0.9 --steps 2",
      "eval --checkpoint " + ck.string() + " --xi 0.9 1 1.1 1.2 --trace " + (out / "trace.csv").string(),
      "heatmap --checkpoint " + ck.string() + " --levels 2",
      "codesign --checkpoint " + ck.string(),
      "dr-compare --budget 2 --seeds 2"};
  std::vector<std::map<std::string, std::string>> runs;
  for (int threads : {1, 3, 1}) {
    fs::remove_all(out);
    for (const auto& c : commands)
      if (run_cli(base + "--threads " + std::to_string(threads) + " " + c) != 0)
        return {false, "command failed: " + c};
    runs.push_back(snapshot(out));
  }
  std::string diff;
  for (std::size_t r = 1; r < runs.size(); ++r)
    for (const auto& [name, text] : runs[0])
      if (!runs[r].count(name) || runs[r].at(name) != text) diff += " " + name;
  if (runs[1].size() != runs[0].size()) diff += " (file sets differ)";
  Outcome o;
  o.pass = diff.empty() && runs[0].size() >= 8;
  o.detail = std::to_string(commands.size()) + " commands, " + std::to_string(runs[0].size()) +
             " output files, threads 1/3/1: " + (diff.empty() ? "byte-identical" : "differ:" + diff);
  return o;
}

// ---- 7 ----------------------------------------------------------------------
Outcome dr_benefit() {
  app::Config c = desk_config();
  const sim::EnvSetup setup = app::env_setup(c);
  codesign::DrComparisonOptions o;
  o.modes = {sim::DrMode::kSpatial, sim::DrMode::kNone};
  o.seeds.clear();
  for (int s = 0; s < kDrSeeds; ++s) o.seeds.push_back(static_cast<std::uint64_t>(s));
  o.test_count = kDrTests;
  o.test_seed = c.experiments.dr_test_seed;
  o.fitness = app::fitness_options(c, 0);
  o.fitness.n_envs = c.experiments.dr_eval_envs;
  double spatial_train_seconds = 0.0;
  int spatial_runs = 0;
  auto train = [&](sim::DrMode mode, std::uint64_t seed) {
    const auto t0 = Clock::now();
    app::PretrainResult r;
    if (mode == sim::DrMode::kSpatial) {
      r = spatial_pretrain(c, seed);
      if (r.seconds > 0.0) {
        spatial_train_seconds += r.seconds;
        ++spatial_runs;
      }
    } else {
      std::fprintf(stderr, "  pretraining %s seed %lu\n", sim::dr_name(mode), static_cast<unsigned long>(seed));
      r = app::pretrain(c, mode, c.ppo.reg_mode, seed);
    }
    std::fprintf(stderr, "  %s seed %lu done in %.0f s\n", sim::dr_name(mode),
                 static_cast<unsigned long>(seed), seconds_since(t0));
    return codesign::TrainedPolicy{std::move(r.checkpoint.agent), r.seconds, r.rebuilds};
  };
  const auto reps = codesign::dr_comparison(train, setup, o);
  const auto& spatial = reps[0];
  const auto& none = reps[1];
  const auto seed_level = codesign::welch_t_test(spatial.seed_means, none.seed_means);

  std::fprintf(stderr, "  temporal run\n");
  const auto temporal = app::pretrain(c, sim::DrMode::kTemporal, c.ppo.reg_mode, 0);
  if (spatial_runs == 0) {  // every spatial run came from the cache; time one afresh
    spatial_train_seconds = app::pretrain(c, sim::DrMode::kSpatial, c.ppo.reg_mode, 0).seconds;
    spatial_runs = 1;
  }
  const double overhead = temporal.seconds / (spatial_train_seconds / spatial_runs);

  std::string seeds_s, seeds_n;
  for (double v : spatial.seed_means) seeds_s += " " + f3(v);
  for (double v : none.seed_means) seeds_n += " " + f3(v);
  std::fprintf(stderr, "  spatial per-seed means:%s\n  none per-seed means:%s\n", seeds_s.c_str(),
               seeds_n.c_str());
  Outcome out;
  out.pass = spatial.mean > none.mean && spatial.p_vs_spatial <= 1.0 && none.p_vs_spatial < kDrAlpha &&
             temporal.rebuilds == kExpectedRebuilds;
  out.detail = "spatial " + f3(spatial.mean) + " vs none " + f3(none.mean) + " over " +
               std::to_string(kDrTests) + " morphologies x " + std::to_string(kDrSeeds) +
               " seeds, Welch p " + f3(none.p_vs_spatial) + " (< " + f3(kDrAlpha) +
               " required; per-seed Welch p " + f3(seed_level.p) + "), temporal rebuilds " +
               std::to_string(temporal.rebuilds) + " (= 80), temporal/spatial wall-clock " +
               f3(overhead) + "x";
  return out;
}

// ---- 8 ----------------------------------------------------------------------
Outcome finetune_speedup() {
  app::Config c = desk_config();
  const sim::EnvSetup setup = app::env_setup(c);
  const app::PretrainResult pre = spatial_pretrain(c, 0);
  const std::vector<ScalingFactors> held_out{{{0.75, 1.25, 0.9, 1.1}}, {{1.3, 0.8, 1.2, 0.7}}};
  bool pass = true;
  std::string detail;
  for (std::size_t k = 0; k < held_out.size(); ++k) {
    const ScalingFactors& xi = held_out[k];
    const std::uint64_t seed = 100 + k;
    // From scratch: a fresh agent on identical robots at xi.
    Rng init(mix64(seed));
    ppo::PpoConfig pc = c.ppo;
    ppo::Agent scratch = ppo::make_agent(pc, init);
    sim::Population pop(c.run.n_envs, sim::DrMode::kNone, seed, setup.task, setup.sim, setup.morph, xi);
    const auto t0 = Clock::now();
    const auto scratch_curve = ppo::train(scratch, pop, pc, kScratchEpochs, app::train_options(c, seed));
    const double scratch_s = seconds_since(t0);
    // Fine-tuned: the pretrained policy plus 10% of the epochs.
    const auto t1 = Clock::now();
    const auto tuned = app::finetune(c, pre.checkpoint, xi, kFinetuneEpochs, seed);
    const double tune_s = seconds_since(t1);

    codesign::FitnessOptions fo = app::fitness_options(c, seed);
    const double f_scratch = codesign::evaluate_fitness(scratch, xi, setup, fo).f;
    const double f_tuned = codesign::evaluate_fitness(tuned.checkpoint.agent, xi, setup, fo).f;
    const double f_pre = codesign::evaluate_fitness(pre.checkpoint.agent, xi, setup, fo).f;
    const double reach = f_tuned / f_scratch;
    const double gap = std::abs(f_tuned - f_scratch) / std::abs(f_scratch);
    const bool ok = f_scratch > 0.0 && reach >= kReachFrac && gap <= kAgreeFrac;
    pass = pass && ok;
    std::fprintf(stderr, "  xi%zu: scratch training return %.2f after %d epochs (%.0f s), fine-tune %.0f s\n", k,
                 scratch_curve.back().mean_return, kScratchEpochs, scratch_s, tune_s);
    detail += (k ? "; " : "") + std::string("xi") + std::to_string(k) + " scratch " + f3(f_scratch) +
              " @" + std::to_string(kScratchEpochs) + " vs fine-tuned " + f3(f_tuned) + " @" +
              std::to_string(kFinetuneEpochs) + " (pretrained " + f3(f_pre) + "): ratio " + f3(reach) +
              " (>= 0.9), gap " + f3(100 * gap) + "% (<= 5%)";
  }
  return {pass, detail};
}

// ---- 9 ----------------------------------------------------------------------
Outcome bo_sanity() {
  const auto t0 = Clock::now();
  int hits = 0;
  std::vector<double> bo_r, rs_r;
  for (int s = 0; s < kBoSeeds; ++s) {
    const auto o = oracle::synthetic_bo(static_cast<std::uint64_t>(s));
    if (o.linf <= kBoLinf) ++hits;
    bo_r.push_back(o.bo_regret);
    rs_r.push_back(o.rs_regret);
  }
  const double secs = seconds_since(t0);
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return 0.5 * (v[(v.size() - 1) / 2] + v[v.size() / 2]);
  };
  const double mb = median(bo_r), mr = median(rs_r);
  Outcome o;
  o.pass = hits >= kBoHits && mb < mr && secs < kBoSeconds;
  o.detail = std::to_string(hits) + "/" + std::to_string(kBoSeeds) + " seeds within L-inf " + f3(kBoLinf) +
             " (>= 9), median regret BO " + f3(mb) + " vs random " + f3(mr) + ", " + f3(secs) + " s (< 60 s)";
  return o;
}

// ---- 10 ---------------------------------------------------------------------
Outcome codesign_smoke() {
  app::Config c = desk_config();
  const app::PretrainResult pre = spatial_pretrain(c, 0);
  const fs::path dir = scratch_dir("codesign");
  const fs::path ck = kWork / "pretrain_spatial_seed0.checkpoint.json";
  json j = app::config_to_json(c);
  j["run"]["out_dir"] = (dir / "out").string();
  j["bo"]["initial_design"] = 4;
  j["bo"]["iterations"] = 4;
  j["bo"]["finetune_steps"] = kFinetuneEpochs;
  write_file(dir / "config.json", j.dump());
  const std::string base = "--config " + (dir / "config.json").string() + " ";
  const auto t0 = Clock::now();
  if (run_cli(base + "codesign --task long_jump --checkpoint " + ck.string(), (dir / "codesign.log").string()) != 0)
    return {false, "codesign command failed, see " + (dir / "codesign.log").string()};
  const double secs = seconds_since(t0);
  const json rep = json::parse(slurp(dir / "out" / "codesign_report.json"));
  const std::string schema = app::check_codesign_report(rep);
  // The default morphology gets the same fine-tune and evaluation.
  if (run_cli(base + "finetune --checkpoint " + ck.string() + " --xi 1 1 1 1 --steps " +
              std::to_string(kFinetuneEpochs)) != 0)
    return {false, "default-morphology fine-tune failed"};
  const fs::path tuned = dir / "out" / "finetune_xi_1.0000_1.0000_1.0000_1.0000.checkpoint.json";
  if (run_cli(base + "eval --checkpoint " + tuned.string() + " --xi 1 1 1 1") != 0)
    return {false, "default-morphology eval failed"};
  const double f_default = json::parse(slurp(dir / "out" / "eval_report.json"))["f"].get<double>();
  const double f_best = rep["best"]["f"].get<double>();
  std::string best_xi;
  for (const auto& v : rep["best"]["xi"]) best_xi += (best_xi.empty() ? "" : ",") + f3(v.get<double>());
  Outcome o;
  o.pass = schema.empty() && f_best >= f_default;
  o.detail = "best xi (" + best_xi + ") f " + f3(f_best) + " vs fine-tuned default " + f3(f_default) +
             ", schema " + (schema.empty() ? "valid" : "INVALID: " + schema) + ", " +
             std::to_string(rep["records"].size()) + " candidates in " + f3(secs / 60.0) + " min";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"equivalence of discount and activation regularization", equivalence},
      {"GAE against brute force", gae},
      {"gradient integrity", gradients},
      {"morphology math", morphology},
      {"physics sanity", physics},
      {"determinism across reruns and thread counts", determinism},
      {"spatial domain randomization benefit", dr_benefit},
      {"fine-tuning speedup", finetune_speedup},
      {"Bayesian optimization on a synthetic objective", bo_sanity},
      {"end-to-end co-design smoke run", codesign_smoke}};

  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      std::string list = argv[++i];
      for (std::size_t pos = 0; pos <= list.size();) {
        const std::size_t comma = std::min(list.find(',', pos), list.size());
        only.insert(std::stoi(list.substr(pos, comma - pos)));
        pos = comma + 1;
      }
    } else {
      std::fprintf(stderr, "usage: %s [--only N[,N...]]\n", argv[0]);
      return 2;
    }
  }
  fs::create_directories(kWork);
  int failed = 0, ran = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    ++ran;
    if (!o.pass) ++failed;
    std::printf("%s [%2d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(),
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
