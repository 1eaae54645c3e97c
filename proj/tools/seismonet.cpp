// Command-line front end: `seismonet [--config FILE] [--seed N] [--set k=v]... <command>`.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "seismonet/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = seismonet::cli;

  CLI::App app{"SCG R-peak detection: synthesize data, train, infer, evaluate and analyze HRV"};
  app.require_subcommand(1);
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "RNG seed (overrides the config)");
  app.add_option("--set", overrides, "override one key, e.g. --set train.epochs=5 (repeatable)");

  auto* synth = app.add_subcommand("synth", "write synthetic records and annotations to paths.data_dir");
  auto* train = app.add_subcommand("train", "train on paths.data_dir, writing checkpoints to paths.output_dir");
  std::optional<std::size_t> epochs;
  train->add_option("--epochs", epochs, "shorthand for --set train.epochs=N");
  auto* infer = app.add_subcommand("infer", "predict the transform and peaks of one record");
  std::string record_path;
  infer->add_option("record", record_path, "record CSV (t,scg[,ecg])")->required()->check(CLI::ExistingFile);
  auto* eval = app.add_subcommand("eval", "score the test split: report.csv, hrv.csv, agreement_*.csv");
  auto* hrv = app.add_subcommand("hrv", "HRV indices of a peak annotation file");
  std::string peaks_path;
  hrv->add_option("peaks", peaks_path, "one sample index per line")->required()->check(CLI::ExistingFile);
  auto* agree = app.add_subcommand("agree", "Bland-Altman agreement of the scg and ecg rows of an HRV report");
  std::string hrv_csv;
  agree->add_option("hrv_csv", hrv_csv, "report written by eval")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (epochs) overrides.push_back("train.epochs=" + std::to_string(*epochs));
    const auto config = cli::load_run_config(config_path, overrides, seed);
    if (synth->parsed()) cli::cmd_synth(config, std::cout);
    else if (train->parsed()) cli::cmd_train(config, std::cout);
    else if (infer->parsed()) cli::cmd_infer(config, record_path, std::cout);
    else if (eval->parsed()) cli::cmd_eval(config, std::cout);
    else if (hrv->parsed()) cli::cmd_hrv(config, peaks_path, std::cout);
    else if (agree->parsed()) cli::cmd_agree(config, hrv_csv, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_code_for(e);
  }
  return 0;
}
