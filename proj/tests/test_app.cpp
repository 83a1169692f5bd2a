#include <gtest/gtest.h>

#include "cli_util.hpp"
#include "legopt/app/pipeline.hpp"

namespace legopt::app {
namespace {

using namespace legopt::testing;

// --- config ----------------------------------------------------------------

TEST(Config, DefaultsRoundTrip) {
  const Config c = config_from_json(json::object());
  const json j = config_to_json(c);
  const Config back = config_from_json(json::parse(j.dump()));
  EXPECT_EQ(config_to_json(back), j);
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(c.ppo.gamma, 0.99);
  EXPECT_EQ(c.run.n_envs, 256u);
}

TEST(Config, OverridesApply) {
  const Config c = config_from_json(
      {{"ppo", {{"gamma", 0.98}, {"reg_mode", "a_reg"}}}, {"task", {{"kind", "high_jump"}}}});
  EXPECT_EQ(c.ppo.gamma, 0.98);
  EXPECT_EQ(c.ppo.reg_mode, ppo::RegMode::kActivation);
  EXPECT_EQ(c.task.kind, sim::TaskKind::kHighJump);
  EXPECT_NE(config_hash(c), config_hash(config_from_json(json::object())));
}

TEST(Config, UnknownKeyNamesItsPath) {
  try {
    config_from_json({{"ppo", {{"gama", 0.9}}}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("ppo.gama"), std::string::npos) << e.what();
  }
  EXPECT_THROW(config_from_json({{"extra", 1}}), ConfigError);
}

TEST(Config, WrongTypesAndBadValues) {
  EXPECT_THROW(config_from_json({{"ppo", {{"gamma", "high"}}}}), ConfigError);
  EXPECT_THROW(config_from_json({{"ppo", {{"gamma_reg", 0.999}}}}), ConfigError);
  EXPECT_THROW(config_from_json({{"morphology", {{"poly", {1.0, 1.0, 0.0, 0.0}}}}}), ConfigError);
  EXPECT_NO_THROW(config_from_json(
      {{"morphology", {{"poly", {1.0, 1.0, 0.0, 0.0}}, {"poly_strictness", "renormalize"}}}}));
  EXPECT_THROW(config_from_json({{"task", {{"kind", "pole_vault"}}}}), ConfigError);
  EXPECT_THROW(config_from_json({{"run", {{"n_envs", 0}}}}), ConfigError);
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config("/nonexistent/legopt.json"), ConfigError); }

// --- checkpoint ------------------------------------------------------------

Checkpoint small_checkpoint() {
  Config c = config_from_json({{"ppo", {{"actor_hidden", {8}}, {"critic_hidden", {8}}}}});
  Rng rng(1);
  Checkpoint ck;
  ck.agent = ppo::make_agent(c.ppo, rng);
  ck.agent.policy.mean.params()[3] = 1.0 / 3.0;
  ck.meta.epochs = 7;
  ck.meta.pretrain_epochs = 5;
  ck.meta.seed = 42;
  ck.meta.finetuned_xi = ScalingFactors{{0.7, 0.8, 0.9, 1.1}};
  ck.meta.config = config_to_json(c);
  ck.meta.config_hash = config_hash(c);
  return ck;
}

TEST(Checkpoint, RoundTripIsExact) {
  const fs::path d = scratch_dir("ckpt_roundtrip");
  const Checkpoint ck = small_checkpoint();
  save_checkpoint(d / "a.json", ck);
  const Checkpoint back = load_checkpoint(d / "a.json");
  EXPECT_TRUE(back.agent == ck.agent);
  EXPECT_EQ(back.meta.epochs, 7);
  EXPECT_EQ(back.meta.seed, 42u);
  ASSERT_TRUE(back.meta.finetuned_xi.has_value());
  EXPECT_EQ(back.meta.finetuned_xi->xi, ck.meta.finetuned_xi->xi);
  save_checkpoint(d / "b.json", back);
  EXPECT_EQ(slurp(d / "a.json"), slurp(d / "b.json"));
}

TEST(Checkpoint, TruncatedFileIsFormatError) {
  const fs::path d = scratch_dir("ckpt_truncated");
  save_checkpoint(d / "a.json", small_checkpoint());
  const std::string text = slurp(d / "a.json");
  write_file(d / "cut.json", text.substr(0, text.size() / 2));
  EXPECT_THROW(load_checkpoint(d / "cut.json"), FormatError);
  EXPECT_THROW(load_checkpoint(d / "missing.json"), UsageError);
}

TEST(Checkpoint, ShapeAndVersionMismatch) {
  json j = checkpoint_to_json(small_checkpoint());
  json bad_shape = j;
  bad_shape["architecture"]["actor_sizes"][0] = 99;
  try {
    checkpoint_from_json(bad_shape);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("99"), std::string::npos);
  }
  json bad_version = j;
  bad_version["version"] = 2;
  EXPECT_THROW(checkpoint_from_json(bad_version), FormatError);
  json no_weights = j;
  no_weights.erase("critic");
  EXPECT_THROW(checkpoint_from_json(no_weights), FormatError);
}

// --- report helpers --------------------------------------------------------

TEST(Reports, CodesignSchemaCheck) {
  const Config c = config_from_json(json::object());
  codesign::CodesignResult res;
  for (int i = 0; i < 3; ++i) {
    codesign::CandidateRecord r;
    r.iteration = i;
    r.f = i == 1 ? 5.0 : 1.0;
    res.records.push_back(r);
  }
  res.best = codesign::best_record(res.records);
  json rep = codesign_report(c, res, "pre.json");
  EXPECT_EQ(check_codesign_report(rep), "");
  rep["best"]["f"] = 1.0;
  EXPECT_NE(check_codesign_report(rep), "");
  rep = codesign_report(c, res, "pre.json");
  rep["records"][0].erase("xi");
  EXPECT_NE(check_codesign_report(rep), "");
}

TEST(Reports, CsvLayouts) {
  std::vector<ppo::TrainStats> stats(2);
  stats[1].epoch = 2;
  stats[1].mean_return = 1.5;
  const std::string csv = curves_csv(stats);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kCurvesHeader);
  EXPECT_NE(csv.find("\n2,1.5,"), std::string::npos);
  std::vector<codesign::HeatmapCell> cells;
  for (const auto& xi : morphology_grid(2)) cells.push_back({xi, 1.0, true, ""});
  cells[5].valid = false;
  const std::string hm = heatmap_csv(cells);
  EXPECT_EQ(std::count(hm.begin(), hm.end(), '\n'), 5);
  EXPECT_EQ(hm.substr(0, hm.find('\n')), "xi0/xi1|xi2/xi3,0.6000/0.6000,0.6000/1.4000,1.4000/0.6000,1.4000/1.4000");
  EXPECT_NE(hm.find("\n0.6000/1.4000,1,nan,1,1\n"), std::string::npos);
  EXPECT_THROW(heatmap_csv(std::vector<codesign::HeatmapCell>(2)), UsageError);
  const std::string th = trace_header();
  EXPECT_EQ(std::count(th.begin(), th.end(), ','), 18);
}

// --- command line ----------------------------------------------------------

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = scratch_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
    cfg_ = dir_ / "config.json";
    write_file(cfg_, tiny_config(dir_ / "out").dump());
  }
  std::string with_config(const std::string& args) const { return "--config " + cfg_.string() + " " + args; }
  fs::path dir_, cfg_;
};

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("fly"), 2);
  EXPECT_EQ(run_cli("--config /nonexistent.json inspect-morph"), 2);
  EXPECT_EQ(run_cli("inspect-morph --xi 1 1 1 1.5"), 2);
  EXPECT_EQ(run_cli("inspect-morph --xi 1 1 1 1.2"), 0);
  EXPECT_EQ(run_cli(with_config("pretrain --dr sideways")), 2);
  EXPECT_EQ(run_cli("eval --checkpoint " + (dir_ / "none.json").string()), 2);
  EXPECT_EQ(run_cli("verify-equivalence --gamma 0.9 --gamma-reg 0.9"), 2);
  EXPECT_EQ(run_cli("verify-equivalence --seeds 2"), 0);
  EXPECT_EQ(run_cli("verify-equivalence --seeds 1 --wrong-beta"), 1);
  write_file(dir_ / "broken.json", "{\"version\": 1, \"architecture\"");
  EXPECT_EQ(run_cli("eval --checkpoint " + (dir_ / "broken.json").string()), 1);
  write_file(dir_ / "bad.json", "{\"ppo\": {\"nope\": 1}}");
  EXPECT_EQ(run_cli("--config " + (dir_ / "bad.json").string() + " inspect-morph"), 2);
}

TEST_F(Cli, PipelineProducesItsFiles) {
  const fs::path out = dir_ / "out";
  ASSERT_EQ(run_cli(with_config("pretrain --dr spatial --reg d_reg")), 0);
  const fs::path ck = out / "pretrain_spatial_d_reg.checkpoint.json";
  ASSERT_TRUE(fs::exists(ck));
  const std::string curves = slurp(out / "curves.csv");
  EXPECT_EQ(std::count(curves.begin(), curves.end(), '\n'), 3);  // header + 2 epochs

  ASSERT_EQ(run_cli(with_config("finetune --checkpoint " + ck.string() + " --xi 0.8 1.2 1 1 --steps 1")), 0);
  EXPECT_TRUE(fs::exists(out / "finetune_xi_0.8000_1.2000_1.0000_1.0000.checkpoint.json"));

  ASSERT_EQ(run_cli(with_config("eval --checkpoint " + ck.string() + " --trace " +
                                (out / "trace.csv").string())),
            0);
  const json ev = json::parse(slurp(out / "eval_report.json"));
  EXPECT_EQ(ev["returns"].size(), 2u);
  EXPECT_TRUE(fs::exists(out / "trace.csv"));

  ASSERT_EQ(run_cli(with_config("heatmap --checkpoint " + ck.string() + " --levels 2")), 0);
  const std::string hm = slurp(out / "heatmap.csv");
  EXPECT_EQ(std::count(hm.begin(), hm.end(), '\n'), 5);

  ASSERT_EQ(run_cli(with_config("codesign --task long_jump --checkpoint " + ck.string())), 0);
  const json rep = json::parse(slurp(out / "codesign_report.json"));
  EXPECT_EQ(check_codesign_report(rep), "");
  EXPECT_EQ(rep["records"].size(), 3u);
  EXPECT_TRUE(fs::exists(out / "candidates" / "candidate_000.checkpoint.json"));
}

TEST_F(Cli, TemporalPretrainReportsRebuilds) {
  const fs::path log = dir_ / "log.txt";
  ASSERT_EQ(run_cli(with_config("pretrain --dr temporal --epochs 81"), log.string()), 0);
  EXPECT_NE(slurp(log).find("rebuilds 80"), std::string::npos);
}

}  // namespace
}  // namespace legopt::app
