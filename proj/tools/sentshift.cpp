#include "sentshift/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char **argv) {
  using namespace sentshift::cli;
  CLI::App app{"sentshift: sentiment shift audit for machine translation"};
  app.require_subcommand(1);

  std::string config_path;
  auto *validate = app.add_subcommand("validate", "check a configuration and adapter handshakes");
  validate->add_option("config", config_path)->required();

  RunOptions run_options;
  auto *run = app.add_subcommand("run", "run the audit and write reports");
  run->add_option("config", config_path)->required();
  run->add_flag("--resume", run_options.resume, "reuse cached adapter responses");
  run->add_option("-j,--jobs", run_options.jobs, "language pairs processed concurrently")->check(CLI::PositiveNumber);

  StatsArgs stats_args;
  auto *stats = app.add_subcommand("stats", "apply one primitive to files");
  stats->require_subcommand(1);
  std::string first, second;
  auto add_files = [&](CLI::App *cmd, const char *a, const char *b) {
    cmd->add_option(a, first)->required()->check(CLI::ExistingFile);
    cmd->add_option(b, second)->required()->check(CLI::ExistingFile);
  };
  auto *wd = stats->add_subcommand("wd", "Wasserstein-1 distance of two columns of reals");
  add_files(wd, "a", "b");
  auto *ttest = stats->add_subcommand("ttest", "paired t-test of two columns of reals");
  add_files(ttest, "a", "b");
  ttest->add_option("--alt", stats_args.alternative)->check(CLI::IsMember({"two-sided", "greater", "less"}));
  auto *chi2 = stats->add_subcommand("chi2", "chi-square test of two label count files");
  add_files(chi2, "a", "b");
  auto *pearson = stats->add_subcommand("pearson", "Pearson correlation of two columns");
  add_files(pearson, "x", "y");
  pearson->add_flag("--fit", stats_args.fit, "also print the least-squares line");
  auto *bleu = stats->add_subcommand("bleu", "corpus BLEU of hypothesis lines against reference lines");
  add_files(bleu, "hypotheses", "references");
  bleu->add_option("--tokenize", stats_args.tokenize)->check(CLI::IsMember({"whitespace", "character"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? 0 : kExitFatal;
  }

  if (*validate)
    return cmd_validate(config_path, std::cout, std::cerr);
  if (*run)
    return cmd_run(config_path, run_options, std::cout, std::cerr);
  for (auto *sub : stats->get_subcommands()) {
    stats_args.subcommand = sub->get_name();
    stats_args.first = first;
    stats_args.second = second;
    return cmd_stats(stats_args, std::cout, std::cerr);
  }
  return kExitFatal;
}
