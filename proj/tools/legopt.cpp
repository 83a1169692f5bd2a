// legopt: pretrain, fine-tune and co-design planar quadrupeds from the shell.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "legopt/app/pipeline.hpp"
#include "legopt/ppo/equivalence.hpp"

namespace {

using namespace legopt;
using app::json;
namespace fs = std::filesystem;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

app::Config load(const Globals& g) {
  app::Config c = g.config_path.empty() ? app::config_from_json(json::object())
                                         : app::load_config(g.config_path);
  if (g.seed) c.run.seed = *g.seed;
  if (g.threads) {
    if (*g.threads < 1) throw UsageError("--threads must be >= 1");
    c.run.threads = *g.threads;
  }
  if (const char* dir = std::getenv("LEGOPT_OUT_DIR"); dir && *dir) c.run.out_dir = dir;
  return c;
}

ScalingFactors parse_xi(const std::vector<double>& v, const app::Config& c) {
  if (v.size() != kNumSegments) throw UsageError("--xi needs exactly 4 values");
  ScalingFactors xi;
  for (std::size_t i = 0; i < kNumSegments; ++i) xi[i] = v[i];
  validate_factors(xi, app::bounds_of(c));
  return xi;
}

void say(const std::string& s) { std::cout << s << std::endl; }

int cmd_pretrain(const Globals& g, const std::string& dr_s, const std::string& reg_s, int epochs) {
  app::Config c = load(g);
  const auto dr = sim::parse_dr(dr_s);
  const auto reg = ppo::parse_reg(reg_s);
  const fs::path out(c.run.out_dir);
  const fs::path ckpt = out / ("pretrain_" + dr_s + "_" + reg_s + ".checkpoint.json");
  const int every = c.ppo.checkpoint_every;
  auto r = app::pretrain(c, dr, reg, c.run.seed, epochs, [&](const ppo::TrainStats& s, const ppo::Agent& a) {
    if (s.epoch % 10 == 0 || s.epoch == 1)
      std::cerr << "epoch " << s.epoch << " return " << app::fmt(s.mean_return) << "\n";
    if (every > 0 && s.epoch % every == 0) {
      app::Checkpoint snap;
      snap.agent = a;
      snap.meta.epochs = snap.meta.pretrain_epochs = s.epoch;
      snap.meta.seed = c.run.seed;
      snap.meta.reg_mode = reg_s;
      snap.meta.dr_mode = dr_s;
      snap.meta.config_hash = app::config_hash(c);
      snap.meta.config = app::result_config_json(c);
      app::save_checkpoint(out / ("pretrain_" + dr_s + "_" + reg_s + "_epoch" + std::to_string(s.epoch) +
                                  ".checkpoint.json"),
                           snap);
    }
  });
  app::write_text(out / "curves.csv", app::curves_csv(r.stats));
  app::save_checkpoint(ckpt, r.checkpoint);
  say("checkpoint " + ckpt.generic_string());
  say("curves " + (out / "curves.csv").generic_string());
  if (dr == sim::DrMode::kTemporal) say("rebuilds " + std::to_string(r.rebuilds));
  return 0;
}

int cmd_finetune(const Globals& g, const std::string& ckpt_path, const std::vector<double>& xi_v,
                 int steps) {
  app::Config c = load(g);
  const ScalingFactors xi = parse_xi(xi_v, c);
  const app::Checkpoint pre = app::load_checkpoint(ckpt_path);
  auto r = app::finetune(c, pre, xi, steps, c.run.seed);
  const fs::path out(c.run.out_dir);
  const std::string tag = "finetune_" + app::xi_tag(xi);
  app::save_checkpoint(out / (tag + ".checkpoint.json"), r.checkpoint);
  app::write_text(out / (tag + "_curves.csv"), app::curves_csv(r.stats));
  say("checkpoint " + (out / (tag + ".checkpoint.json")).generic_string());
  return 0;
}

int cmd_codesign(const Globals& g, const std::string& task, const std::string& ckpt_path) {
  app::Config c = load(g);
  if (!task.empty()) c.task.kind = sim::parse_task(task);
  const app::Checkpoint pre = app::load_checkpoint(ckpt_path);
  const fs::path out(c.run.out_dir);
  auto eval = [&](const ScalingFactors& xi, int it) {
    char name[48];
    std::snprintf(name, sizeof name, "candidate_%03d.checkpoint.json", it);
    return app::finetune_and_evaluate(c, pre, xi, c.bo.finetune_steps, c.run.seed,
                                      out / "candidates" / name);
  };
  const auto res = codesign::run_codesign(c.bo, c.run.seed, eval, c.run.wall_clock,
                                          [](const codesign::CandidateRecord& r) {
                                            std::cerr << "candidate " << r.iteration << " f "
                                                      << app::fmt(r.f) << "\n";
                                          });
  const json rep = app::codesign_report(c, res, ckpt_path);
  app::write_text(out / "codesign_report.json", rep.dump(1) + "\n");
  std::string best = "best xi";
  for (double v : res.best.xi.xi) best += " " + app::fmt(v);
  say(best);
  say("best f " + app::fmt(res.best.f));
  return 0;
}

int cmd_heatmap(const Globals& g, const std::string& ckpt_path, std::optional<int> levels,
                bool per_cell, int steps) {
  app::Config c = load(g);
  const int lv = levels.value_or(c.experiments.heatmap_levels);
  if (lv < 2) throw UsageError("--levels must be >= 2");
  const app::Checkpoint pre = app::load_checkpoint(ckpt_path);
  const auto grid = morphology_grid(lv, app::bounds_of(c));
  codesign::PolicyForCell policy;
  if (per_cell)
    policy = [&](const ScalingFactors& xi, std::size_t) {
      return app::finetune(c, pre, xi, steps, c.run.seed).checkpoint.agent;
    };
  else
    policy = [&](const ScalingFactors&, std::size_t) { return pre.agent; };
  const auto cells = codesign::heatmap_eval(policy, grid, app::env_setup(c),
                                            app::fitness_options(c, c.run.seed));
  const fs::path out = fs::path(c.run.out_dir) / "heatmap.csv";
  app::write_text(out, app::heatmap_csv(cells));
  say("heatmap " + out.generic_string());
  return 0;
}

int cmd_eval(const Globals& g, const std::string& ckpt_path, const std::vector<double>& xi_v,
             const std::string& trace_path, std::optional<std::size_t> envs,
             std::optional<int> steps) {
  app::Config c = load(g);
  const ScalingFactors xi = xi_v.empty() ? ScalingFactors::identity() : parse_xi(xi_v, c);
  const app::Checkpoint ck = app::load_checkpoint(ckpt_path);
  auto fo = app::fitness_options(c, c.run.seed);
  if (envs) fo.n_envs = *envs;
  if (steps) fo.steps = *steps;
  std::string trace = trace_path.empty() ? "" : app::trace_header() + "\n";
  codesign::TraceSink sink;
  if (!trace_path.empty()) sink = [&](const codesign::TraceRow& r) { trace += app::trace_row(r) + "\n"; };
  const auto rep = codesign::evaluate_fitness(ck.agent, xi, app::env_setup(c), fo, sink);
  const std::string text = app::fitness_to_json(rep, xi).dump(1) + "\n";
  app::write_text(fs::path(c.run.out_dir) / "eval_report.json", text);
  if (!trace_path.empty()) app::write_text(trace_path, trace);
  std::cout << text;
  return 0;
}

int cmd_verify(double gamma, double gamma_reg, int steps, int seeds, bool wrong_beta) {
  if (!(gamma_reg > 0.0 && gamma_reg < gamma && gamma < 1.0))
    throw UsageError("discount regularization requires 0 < gamma_reg < gamma < 1 (got gamma=" +
                     app::fmt(gamma) + ", gamma_reg=" + app::fmt(gamma_reg) + ")");
  if (steps < 1 || seeds < 1) throw UsageError("--steps and --seeds must be >= 1");
  constexpr double kTol = 1e-8;
  bool all_ok = true;
  std::printf("%-6s %-14s %s\n", "seed", "max_deviation", "status");
  for (int s = 0; s < seeds; ++s) {
    ppo::EquivalenceOptions o;
    o.seed = static_cast<std::uint64_t>(s);
    o.steps = steps;
    o.gamma = gamma;
    o.gamma_reg = gamma_reg;
    o.wrong_beta = wrong_beta;
    const double dev = ppo::equivalence_check(o);
    const bool ok = dev <= kTol;
    all_ok = all_ok && ok;
    std::printf("%-6d %-14.3e %s\n", s, dev, ok ? "ok" : "FAIL");
  }
  std::printf("beta = %.6g, reward scale = %.6g, step scale = %.6g\n",
              ppo::regularizer_beta(gamma, gamma_reg), gamma_reg / gamma, gamma / gamma_reg);
  return all_ok ? 0 : 1;
}

int cmd_dr_compare(const Globals& g, std::optional<int> budget, std::optional<int> n_seeds) {
  app::Config c = load(g);
  const int seeds_n = n_seeds.value_or(c.experiments.dr_seeds);
  if (seeds_n < 2) throw UsageError("--seeds must be >= 2");
  const int epochs = budget.value_or(c.ppo.epochs);
  if (epochs < 1) throw UsageError("--budget must be >= 1");
  codesign::DrComparisonOptions o;
  o.seeds.clear();
  for (int s = 0; s < seeds_n; ++s) o.seeds.push_back(c.run.seed + static_cast<std::uint64_t>(s));
  o.test_count = c.experiments.dr_test_morphologies;
  o.test_seed = c.experiments.dr_test_seed;
  o.fitness = app::fitness_options(c, 0);
  o.fitness.n_envs = c.experiments.dr_eval_envs;
  const auto reg = c.ppo.reg_mode;
  auto train = [&](sim::DrMode mode, std::uint64_t seed) {
    std::cerr << "training " << sim::dr_name(mode) << " seed " << seed << "\n";
    auto r = app::pretrain(c, mode, reg, seed, epochs);
    return codesign::TrainedPolicy{std::move(r.checkpoint.agent), r.seconds, r.rebuilds};
  };
  const auto modes = codesign::dr_comparison(train, app::env_setup(c), o);
  const json rep = app::dr_report(c, modes, epochs, o.seeds);
  const fs::path out = fs::path(c.run.out_dir) / "dr_report.json";
  app::write_text(out, rep.dump(1) + "\n");
  for (const auto& m : modes)
    std::printf("%-9s mean %9.3f  std %8.3f  p %.3g  seconds %.1f  rebuilds %d\n",
                sim::dr_name(m.mode), m.mean, m.std, m.p_vs_spatial, m.seconds, m.rebuilds);
  say("report " + out.generic_string());
  return 0;
}

json robot_to_json(const RobotModel& m) {
  auto link = [](const ScaledLink& l) {
    return json{{"origin_z", l.origin_z}, {"mass", l.mass}, {"ixx", l.ixx},
                {"iyy", l.iyy},           {"izz", l.izz},   {"box", l.box}};
  };
  json legs = json::array();
  for (std::size_t i = 0; i < kNumLegs; ++i) {
    const auto& L = m.legs[i];
    legs.push_back({{"name", i == 0 ? "front" : "hind"},
                    {"hip_anchor", L.hip_anchor},
                    {"thigh", link(L.thigh)},
                    {"shank", link(L.shank)},
                    {"knee_z", L.knee_z},
                    {"foot_z", L.foot_z}});
  }
  json limits = json::array();
  for (const auto& l : m.limits) limits.push_back({l.lo, l.hi});
  return {{"xi", m.xi.xi},
          {"body",
           {{"length", m.body.length}, {"height", m.body.height}, {"mass", m.body.mass}, {"iyy", m.body.iyy}}},
          {"legs", std::move(legs)},
          {"joint_limits", std::move(limits)},
          {"kp", m.pd.kp},
          {"kd", m.pd.kd},
          {"total_mass", m.total_mass}};
}

int cmd_inspect(const Globals& g, const std::vector<double>& xi_v) {
  app::Config c = load(g);
  const ScalingFactors xi = xi_v.empty() ? ScalingFactors::identity() : parse_xi(xi_v, c);
  const RobotModel m = build_robot(c.robot, xi, app::poly_of(c), c.robot.gains, app::bounds_of(c));
  std::cout << robot_to_json(m).dump(1) << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Planar quadruped morphology/control co-design"};
  cli.require_subcommand(1);
  Globals g;
  cli.add_option("--config", g.config_path, "JSON config file (defaults used when omitted)");
  cli.add_option("--seed", g.seed, "master seed, overrides run.seed");
  cli.add_option("--threads", g.threads, "worker threads for environment stepping");

  std::string dr = "spatial", reg = "d_reg", ckpt, trace, task;
  int epochs = -1, steps = -1;
  std::vector<double> xi;
  std::optional<int> levels, budget, n_seeds, eval_steps;
  std::optional<std::size_t> eval_envs;
  bool per_cell = false, wrong_beta = false;
  double gamma = 0.99, gamma_reg = 0.9;
  int eq_steps = 200, eq_seeds = 10;

  auto* pre = cli.add_subcommand("pretrain", "train a policy from scratch");
  pre->add_option("--dr", dr, "domain randomization: spatial, temporal or none");
  pre->add_option("--reg", reg, "regularization: normal, d_reg or a_reg");
  pre->add_option("--epochs", epochs, "override ppo.epochs");

  auto* fin = cli.add_subcommand("finetune", "adapt a pretrained policy to one morphology");
  fin->add_option("--checkpoint", ckpt)->required();
  fin->add_option("--xi", xi)->required()->expected(4);
  fin->add_option("--steps", steps, "PPO epochs (default: 10% of the pretraining epochs)");

  auto* cod = cli.add_subcommand("codesign", "Bayesian optimization with embedded fine-tuning");
  cod->add_option("--task", task, "long_jump or high_jump (default from config)");
  cod->add_option("--checkpoint", ckpt)->required();

  auto* hm = cli.add_subcommand("heatmap", "fitness over a morphology grid");
  hm->add_option("--checkpoint", ckpt)->required();
  hm->add_option("--levels", levels, "grid levels per factor");
  hm->add_flag("--finetune-per-cell", per_cell, "fine-tune the checkpoint for every cell");
  hm->add_option("--steps", steps, "fine-tune epochs per cell (default: 10% of pretraining)");

  auto* ev = cli.add_subcommand("eval", "evaluate a checkpoint at one morphology");
  ev->add_option("--checkpoint", ckpt)->required();
  ev->add_option("--xi", xi)->expected(4);
  ev->add_option("--trace", trace, "per-step CSV of environment 0");
  ev->add_option("--envs", eval_envs, "override bo.fitness_envs");
  ev->add_option("--steps", eval_steps, "override bo.fitness_steps");

  auto* ver = cli.add_subcommand("verify-equivalence", "dual-run discount/regularizer check");
  ver->add_option("--gamma", gamma);
  ver->add_option("--gamma-reg", gamma_reg);
  ver->add_option("--steps", eq_steps);
  ver->add_option("--seeds", eq_seeds);
  ver->add_flag("--wrong-beta", wrong_beta, "debug: flip the regularizer sign (should fail)");

  auto* drc = cli.add_subcommand("dr-compare", "spatial vs temporal vs no randomization");
  drc->add_option("--budget", budget, "training epochs per run (default ppo.epochs)");
  drc->add_option("--seeds", n_seeds, "seeds per mode (default experiments.dr_seeds)");

  auto* ins = cli.add_subcommand("inspect-morph", "print the robot built for a morphology");
  ins->add_option("--xi", xi)->expected(4);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.exit(e);
    return 2;
  }

  try {
    if (*pre) return cmd_pretrain(g, dr, reg, epochs);
    if (*fin) return cmd_finetune(g, ckpt, xi, steps);
    if (*cod) return cmd_codesign(g, task, ckpt);
    if (*hm) return cmd_heatmap(g, ckpt, levels, per_cell, steps);
    if (*ev) return cmd_eval(g, ckpt, xi, trace, eval_envs, eval_steps);
    if (*ver) return cmd_verify(gamma, gamma_reg, eq_steps, eq_seeds, wrong_beta);
    if (*drc) return cmd_dr_compare(g, budget, n_seeds);
    if (*ins) return cmd_inspect(g, xi);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
