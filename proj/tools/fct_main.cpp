// fct: command-line front end for the forward-compatible training toolkit.
//
// Exit status: 0 success, 1 usage or configuration error, 2 runtime or data error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fct/error.hpp"
#include "fct/io/config.hpp"
#include "fct/io/report_io.hpp"
#include "fct/pipeline/experiment.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed, "override the master seed");
  cmd->add_option("--out", args.out, "override output_dir");
}

fct::io::ExperimentConfig resolve(const CommonArgs& args) {
  fct::io::ExperimentConfig cfg = fct::io::load_config(args.config);
  if (args.seed) cfg.seeds.master = *args.seed;
  if (!args.out.empty()) cfg.output_dir = args.out;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fct - forward compatible training toolkit"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string which = "old";
  std::string format = "csv";
  bool dry_run = false;

  auto* gen = app.add_subcommand("gen-data", "sample the training, gallery and query sets");
  auto* emb = app.add_subcommand("train-embedder", "train the old or new embedding model");
  auto* side = app.add_subcommand("train-side-info", "train the side-information model and index the v1 gallery");
  auto* trans = app.add_subcommand("train-transform", "train the transformation h (and the psi = 0 baseline)");
  auto* eval = app.add_subcommand("eval", "evaluate every query/gallery pairing");
  auto* upd = app.add_subcommand("update", "apply the trained transformation to the stored gallery");
  auto* costs = app.add_subcommand("simulate-costs", "backfill vs transformation cost report");
  auto* run = app.add_subcommand("run", "full pipeline");
  for (auto* cmd : {gen, emb, side, trans, eval, upd, costs, run}) add_common(cmd, args);
  emb->add_option("--which", which, "old or new")->check(CLI::IsMember({"old", "new"}));
  eval->add_option("--format", format, "stdout format: csv or json")->check(CLI::IsMember({"csv", "json"}));
  run->add_flag("--dry-run", dry_run, "print the resolved stage plan and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    const fct::io::ExperimentConfig cfg = resolve(args);
    const fct::pipeline::Layout layout{cfg.output_dir};
    namespace pl = fct::pipeline;
    if (*run) {
      if (dry_run) {
        std::cout << pl::describe_plan(cfg);
        return 0;
      }
      std::cout << fct::io::retrieval_csv(pl::run_all(cfg, layout));
    } else if (*gen) {
      pl::stage_gen_data(cfg, layout);
    } else if (*emb) {
      pl::stage_train_embedder(cfg, layout, which);
    } else if (*side) {
      pl::stage_train_side_info(cfg, layout);
    } else if (*trans) {
      pl::stage_train_transform(cfg, layout);
    } else if (*upd) {
      pl::stage_update(cfg, layout);
    } else if (*eval) {
      const auto reports = pl::stage_eval(cfg, layout);
      std::cout << fct::io::emit_report(reports, format == "json" ? fct::io::ReportFormat::Json
                                                                  : fct::io::ReportFormat::Csv);
    } else if (*costs) {
      std::cout << fct::io::cost_csv(pl::stage_simulate_costs(cfg, layout));
    }
    return 0;
  } catch (const fct::ConfigError& e) {
    std::cerr << "fct: config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "fct: error: " << e.what() << "\n";
    return 2;
  }
}
