#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "seismonet/cli.hpp"
#include "seismonet/error.hpp"
#include "test_support.hpp"

using namespace seismonet;
using namespace seismonet::cli;
using seismonet::testing::TempDir;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

/// Small, fast pipeline rooted at `dir`.
std::vector<std::string> small_overrides(const fs::path& dir) {
  return {"paths.data_dir=" + (dir / "data").string(),
          "paths.output_dir=" + (dir / "out").string(),
          "data.fs=100",
          "sampling.target_fs=100",
          "data.window_sec=2",
          "data.hop_sec=1",
          "synth.subjects=3",
          "synth.duration_s=40",
          "model.levels=2",
          "model.base_channels=4",
          "model.ensemble_channels=2",
          "train.epochs=2"};
}

}  // namespace

TEST(RunConfig, DefaultsFollowModelAndTraining) {
  const auto c = load_run_config(std::nullopt, {});
  EXPECT_EQ(c.train.epochs, 300u);
  EXPECT_DOUBLE_EQ(c.train.lr0, 0.001);
  EXPECT_EQ(c.train.schedule_step, 100u);
  EXPECT_DOUBLE_EQ(c.train.schedule_factor, 10.0);
  EXPECT_DOUBLE_EQ(c.eval.tol_ms, 90.0);
  EXPECT_EQ(c.model.input_len, c.window_samples());
  EXPECT_EQ(c.window_samples(), 2500u);
  EXPECT_EQ(c.checkpoint_path(), fs::path("out") / "model.smn");
}

TEST(RunConfig, FileThenOverridesThenSeed) {
  TempDir dir("cfg");
  write_file(dir.path() / "run.cfg",
             "# comment\n"
             "seed = 4\n"
             "train.epochs = 12   # trailing\n"
             "\n"
             "eval.tol_ms = 50\n");
  const auto c = load_run_config(dir.path() / "run.cfg", {"train.epochs=7"}, 99);
  EXPECT_EQ(c.train.epochs, 7u);
  EXPECT_DOUBLE_EQ(c.eval.tol_ms, 50.0);
  EXPECT_EQ(c.seed, 99u);
}

TEST(RunConfig, FormatErrorCarriesLine) {
  TempDir dir("cfg");
  write_file(dir.path() / "bad.cfg", "seed = 1\n\nnot a setting\n");
  try {
    load_run_config(dir.path() / "bad.cfg", {});
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(RunConfig, ConfigErrorsNameTheKey) {
  auto key_of = [](std::vector<std::string> overrides) -> std::string {
    try {
      load_run_config(std::nullopt, overrides);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return "";
  };
  EXPECT_EQ(key_of({"train.epochs=0"}), "train.epochs");
  EXPECT_EQ(key_of({"train.lr0=abc"}), "train.lr0");
  EXPECT_EQ(key_of({"bogus.key=1"}), "bogus.key");
  EXPECT_EQ(key_of({"eval.predictor=magic"}), "eval.predictor");
  EXPECT_EQ(key_of({"model.levels=0"}), "model.levels");
  EXPECT_EQ(key_of({"model.input_len=100"}), "model.input_len");
  EXPECT_EQ(key_of({"data.window_sec=0.123"}), "data.window_sec");
  EXPECT_EQ(key_of({"synth.subjects=0"}), "synth.subjects");
  EXPECT_EQ(key_of({"eval.refractory_ms=0"}), "eval.refractory_ms");
  EXPECT_EQ(key_of({"split.train=0.9"}), "split");
}

TEST(RunConfig, ExitCodes) {
  EXPECT_EQ(exit_code_for(ValidationError("x")), 1);
  EXPECT_EQ(exit_code_for(ConfigError("k", "x")), 1);
  EXPECT_EQ(exit_code_for(FormatError("x", 2)), 1);
  EXPECT_EQ(exit_code_for(NumericError("x")), 2);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), 2);
}

TEST(Commands, SynthWritesLoadableDeterministicFiles) {
  TempDir a("synth_a"), b("synth_b");
  for (const auto* dir : {&a, &b}) {
    std::ostringstream log;
    cmd_synth(load_run_config(std::nullopt, small_overrides(dir->path()), 3), log);
  }
  for (const char* name : {"subj01", "subj02", "subj03"}) {
    const auto csv = fs::path("data") / (std::string(name) + ".csv");
    const auto ann = fs::path("data") / (std::string(name) + ".rpeaks");
    ASSERT_TRUE(fs::exists(a.path() / csv));
    ASSERT_TRUE(fs::exists(a.path() / ann));
    EXPECT_EQ(slurp(a.path() / csv), slurp(b.path() / csv));
    EXPECT_EQ(slurp(a.path() / ann), slurp(b.path() / ann));
    const auto rec = signal::load_record(a.path() / csv, 100.0);
    EXPECT_NO_THROW(rec.validate());
    EXPECT_TRUE(rec.rpeaks && !rec.rpeaks->empty());
  }
  EXPECT_FALSE(fs::exists(a.path() / "data" / "subj04.csv"));
}

TEST(Commands, OraclePipelineIsPerfect) {
  TempDir dir("oracle");
  auto overrides = small_overrides(dir.path());
  overrides.push_back("eval.predictor=oracle");
  const auto config = load_run_config(std::nullopt, overrides, 1);
  std::ostringstream log;
  cmd_synth(config, log);
  const auto inputs_before = slurp(dir.path() / "data" / "subj01.csv");
  cmd_eval(config, log);
  EXPECT_NE(log.str().find("Se 1.00 PPV 1.00"), std::string::npos) << log.str();
  EXPECT_EQ(slurp(dir.path() / "data" / "subj01.csv"), inputs_before);

  const auto report = lines(slurp(dir.path() / "out" / "report.csv"));
  ASSERT_EQ(report.size(), 5u);  // header, 3 subjects, total
  EXPECT_EQ(report.front(), "subject,detected,actual,tp,fp,fn,se,ppv");
  EXPECT_EQ(report.back().rfind("total,", 0), 0u);
  for (std::size_t i = 1; i < report.size(); ++i) {
    std::istringstream row(report[i]);
    std::string subject;
    std::size_t detected, actual, tp, fp, fn;
    char c;
    std::getline(row, subject, ',');
    row >> detected >> c >> actual >> c >> tp >> c >> fp >> c >> fn;
    EXPECT_EQ(tp + fn, actual);
    EXPECT_EQ(tp + fp, detected);
  }
  EXPECT_TRUE(fs::exists(dir.path() / "out" / "hrv.csv"));
  EXPECT_TRUE(fs::exists(dir.path() / "out" / "agreement_mean_nn.csv"));
  const auto hrv = slurp(dir.path() / "out" / "hrv.csv");
  EXPECT_EQ(hrv.rfind("subject,source,mean_nn_ms,sdnn_ms,rmssd_ms,pnn50\n", 0), 0u);
  EXPECT_NE(hrv.find("pooled,scg,"), std::string::npos);
}

TEST(Commands, TrainEvalInferHrvAgree) {
  TempDir dir("pipeline");
  const auto config = load_run_config(std::nullopt, small_overrides(dir.path()), 2);
  std::ostringstream log;
  cmd_synth(config, log);
  cmd_train(config, log);
  const auto out = dir.path() / "out";
  ASSERT_TRUE(fs::exists(out / "model.smn"));
  EXPECT_EQ(lines(slurp(out / "history.csv")).size(), 3u);

  cmd_eval(config, log);
  EXPECT_TRUE(fs::exists(out / "report.csv"));

  const auto record = dir.path() / "data" / "subj02.csv";
  cmd_infer(config, record, log);
  const auto pred = lines(slurp(out / "subj02.pred.csv"));
  ASSERT_GT(pred.size(), 1u);
  EXPECT_EQ(pred.front(), "window,start,sample,t_pred");
  // 40 s at 1 s hop with 2 s windows.
  EXPECT_EQ(pred.size() - 1, 39u * 200u);

  // Peaks of a trained-for-two-epochs model may be sparse, so HRV runs on the
  // reference annotations.
  cmd_hrv(config, dir.path() / "data" / "subj02.rpeaks", log);
  const auto hrv = lines(slurp(out / "subj02.hrv.csv"));
  ASSERT_EQ(hrv.size(), 2u);

  write_file(dir.path() / "pairs.csv",
             "subject,source,mean_nn_ms,sdnn_ms,rmssd_ms,pnn50\n"
             "a,scg,10,1,1,0.1\n"
             "a,ecg,12,1,1,0.1\n"
             "b,scg,20,1,1,0.1\n"
             "b,ecg,19,1,1,0.1\n");
  cmd_agree(config, dir.path() / "pairs.csv", log);
  EXPECT_NE(slurp(out / "agreement_mean_nn.csv").find("# mean_diff=-0.5 "), std::string::npos);
}

TEST(Commands, InferPeaksStrictlyIncreasing) {
  TempDir dir("infer");
  auto overrides = small_overrides(dir.path());
  const auto config = load_run_config(std::nullopt, overrides, 3);
  std::ostringstream log;
  cmd_synth(config, log);
  model::SeismoNet<float> net(config.model, 3);
  fs::create_directories(dir.path() / "out");
  model::save_checkpoint(net, config.checkpoint_path(), 0);
  cmd_infer(config, dir.path() / "data" / "subj01.csv", log);
  std::ifstream in(dir.path() / "out" / "subj01.peaks");
  std::vector<std::size_t> peaks;
  for (std::size_t v; in >> v;) peaks.push_back(v);
  EXPECT_TRUE(std::adjacent_find(peaks.begin(), peaks.end(), std::greater_equal<>()) == peaks.end());
}

TEST(Commands, Errors) {
  TempDir dir("errors");
  auto overrides = small_overrides(dir.path());
  const auto config = load_run_config(std::nullopt, overrides);
  std::ostringstream log;
  // No checkpoint yet.
  EXPECT_THROW(cmd_eval(config, log), ValidationError);
  cmd_synth(config, log);
  // Too short for one window.
  write_file(dir.path() / "short.csv", "t,scg\n0,0.1\n0.01,0.2\n0.02,0.3\n");
  model::SeismoNet<float> net(config.model, 1);
  fs::create_directories(dir.path() / "out");
  model::save_checkpoint(net, config.checkpoint_path(), 0);
  EXPECT_THROW(cmd_infer(config, dir.path() / "short.csv", log), EmptyResultError);
  // Checkpoint built for another window length.
  auto other = overrides;
  other.push_back("data.window_sec=4");
  try {
    cmd_eval(load_run_config(std::nullopt, other), log);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "data.window_sec");
  }
  write_file(dir.path() / "one.csv", "subject,source,mean_nn_ms,sdnn_ms,rmssd_ms,pnn50\na,scg,1,1,1,0\na,ecg,1,1,1,0\n");
  EXPECT_THROW(cmd_agree(config, dir.path() / "one.csv", log), InsufficientDataError);
}

TEST(Binary, ExitCodesAndOracleEval) {
  const char* exe = std::getenv("SEISMONET_CLI");
  if (exe == nullptr) GTEST_SKIP() << "SEISMONET_CLI not set";
  TempDir dir("binary");
  std::string sets;
  for (const auto& o : small_overrides(dir.path())) sets += " --set " + o;
  const std::string base = std::string(exe) + " --seed 5" + sets;
  auto run = [](const std::string& cmd) {
    const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  EXPECT_EQ(run(base + " synth"), 0);
  EXPECT_EQ(run(base + " --set eval.predictor=oracle eval"), 0);
  EXPECT_NE(slurp(dir.path() / "out" / "report.csv").find(",1.00,1.00"), std::string::npos);
  EXPECT_EQ(run(base + " --set no.such=1 synth"), 1);
  EXPECT_EQ(run(base + " eval"), 1);  // missing checkpoint
  EXPECT_EQ(run(base + " train --epochs 1"), 0);
  EXPECT_EQ(lines(slurp(dir.path() / "out" / "history.csv")).size(), 2u);
  EXPECT_EQ(run(base + " --set train.lr0=1e30 --set train.reduction=sum train --epochs 3"), 2);
  EXPECT_EQ(run(std::string(exe)), 1);  // subcommand required
}
