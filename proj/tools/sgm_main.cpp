#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sgm/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"stochastic gradient methods: experiments, lemma simulations, plots"};
  app.require_subcommand(1);

  std::string config_path, output_dir = sgm::cli::default_output_dir();
  std::vector<std::string> overrides;
  double window_fraction = 0.5, quantile = 0.05;
  std::string run_dir, metrics_path;

  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("--config", config_path, "experiment config (or manifest.json)")->required();
  run->add_option("--out", output_dir, "output directory (default $SGM_OUT_DIR or ./sgm_out)");
  run->add_option("--set", overrides, "dot-path config overrides, key=value");

  auto* lemma = app.add_subcommand("lemma-sim", "run recursion-lemma simulations");
  lemma->add_option("--config", config_path, "lemma-sim config")->required();
  lemma->add_option("--out", output_dir, "output directory");

  auto* analyze = app.add_subcommand("analyze", "recompute fits from a run directory");
  analyze->add_option("--dir", run_dir, "run directory containing metrics.csv")->required();
  analyze->add_option("--out", output_dir, "output directory");
  analyze->add_option("--window-fraction", window_fraction, "tail fraction of the log-t range");
  analyze->add_option("--quantile", quantile, "aggregate quantile");

  auto* list = app.add_subcommand("list-problems", "list built-in problem families");
  (void)list;

  auto* plot = app.add_subcommand("plot", "emit SVG log-log plots from metrics.csv");
  plot->add_option("--metrics", metrics_path, "metrics.csv path")->required();
  plot->add_option("--out", output_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : sgm::cli::kExitValidation;
  }

  if (run->parsed()) return sgm::cli::cmd_run(config_path, output_dir, overrides);
  if (lemma->parsed()) return sgm::cli::cmd_lemma_sim(config_path, output_dir);
  if (analyze->parsed())
    return sgm::cli::cmd_analyze(run_dir, output_dir, window_fraction, quantile);
  if (app.get_subcommand("list-problems")->parsed()) return sgm::cli::cmd_list_problems();
  if (plot->parsed()) return sgm::cli::cmd_plot(metrics_path, output_dir);
  return sgm::cli::kExitValidation;
}
