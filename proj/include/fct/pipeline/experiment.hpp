#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fct/io/config.hpp"
#include "fct/retrieval/report.hpp"
#include "fct/synthdata/domain.hpp"
#include "fct/update/cost.hpp"

namespace fct::pipeline {

// Layout of an experiment directory:
//   config.resolved.json
//   data/{train_old,train_new,gallery,query}.fctg      raw inputs, class = joint label
//   models/{old,new,side,h,h_zero}.ckpt
//   galleries/gallery_v1.fctg   old embedding + side-information
//   galleries/gallery_v2.fctg   after the FCT update
//   galleries/gallery_v2_zero.fctg   after the update trained without side-information
//   loss/<stage>.csv
//   reports.csv, reports.json, per_group.csv, costs.csv, costs.json
// Sequence experiments write data/train_v<i>.fctg, models/{phi,psi}_v<i>.ckpt and
// the transformations of every hop, then the same report files.
struct Layout {
  std::filesystem::path root;

  std::filesystem::path data(const std::string& name) const { return root / "data" / (name + ".fctg"); }
  std::filesystem::path model(const std::string& name) const { return root / "models" / (name + ".ckpt"); }
  std::filesystem::path gallery(const std::string& name) const { return root / "galleries" / (name + ".fctg"); }
  std::filesystem::path loss(const std::string& name) const { return root / "loss" / (name + ".csv"); }
  std::filesystem::path file(const std::string& name) const { return root / name; }
};

// Every (color, shape) sample set an experiment draws, regenerated from the config.
struct DataSplits {
  SyntheticDomain domain;
  LabeledSet train_old;
  LabeledSet train_new;
  LabeledSet gallery;
  LabeledSet query;
  std::vector<LabeledSet> train_versions;  // sequence experiments only
};

DataSplits generate_data(const io::ExperimentConfig& cfg);

// Stage names in execution order, e.g. for --dry-run.
std::vector<std::string> stage_plan(const io::ExperimentConfig& cfg);
// Human-readable plan: resolved seeds, shapes of every stage, output files.
std::string describe_plan(const io::ExperimentConfig& cfg);

// Stages of the FCT experiment. Each reads what earlier stages wrote under
// `layout` and checks its inputs before writing anything.
void stage_gen_data(const io::ExperimentConfig& cfg, const Layout& layout);
// which: "old" or "new".
void stage_train_embedder(const io::ExperimentConfig& cfg, const Layout& layout, const std::string& which);
// Trains psi on the old training set and indexes the v1 gallery.
void stage_train_side_info(const io::ExperimentConfig& cfg, const Layout& layout);
// Trains h with psi and, when zero_side_baseline is set, h_zero with psi = 0.
void stage_train_transform(const io::ExperimentConfig& cfg, const Layout& layout);
void stage_update(const io::ExperimentConfig& cfg, const Layout& layout);
std::vector<RetrievalReport> stage_eval(const io::ExperimentConfig& cfg, const Layout& layout);
UpdateCostReport stage_simulate_costs(const io::ExperimentConfig& cfg, const Layout& layout);

// Three-or-more version chain: per-version models, hop transformations
// (h_i, g_i), the direct long hop and their no-side counterparts.
std::vector<RetrievalReport> run_sequence(const io::ExperimentConfig& cfg, const Layout& layout);

// Full pipeline for either experiment kind; writes config.resolved.json first.
std::vector<RetrievalReport> run_all(const io::ExperimentConfig& cfg, const Layout& layout);

// Top-1 CMC of the named row; throws StateError if absent.
double top1(const std::vector<RetrievalReport>& reports, const std::string& case_name);

}  // namespace fct::pipeline
