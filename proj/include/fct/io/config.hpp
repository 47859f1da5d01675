#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fct/training/config.hpp"
#include "fct/training/side_info.hpp"

namespace fct::io {

enum class ExperimentKind { Fct, Sequence };

struct DomainConfig {
  std::size_t colors = 4;
  std::size_t shapes = 4;
  std::size_t dim = 32;
  double sigma = 0.5;
};

struct DataConfig {
  std::vector<int> old_shapes{0, 1};
  // Label set of the old task: "color" (colors only) or "joint".
  std::string old_labels = "color";
  std::vector<int> new_shapes{0, 1, 2, 3};
  std::size_t train_per_cell = 512;
  std::size_t eval_per_class = 32;
  // Shape subsets of each version of a sequence experiment (v1, v2, ...).
  std::vector<std::vector<int>> version_shapes{{0}, {0, 1}, {0, 1, 2, 3}};
};

struct ModelConfig {
  std::size_t hidden = 64;
  std::size_t depth = 2;
  std::size_t d_old = 16;
  std::size_t d_new = 16;
  std::size_t d_side = 16;
  double width_multiplier = 0.125;
  bool normalize_output = false;
};

// Seeds of every stochastic stage. Unset entries derive from the master seed.
struct SeedConfig {
  std::uint64_t master = 0;
  std::optional<std::uint64_t> domain, data, old_model, new_model, side_info, transformation;

  std::uint64_t get(const std::optional<std::uint64_t>& explicit_seed, const char* stage) const;
};

struct CostConfig {
  std::uint64_t devices = 1000;
  std::uint64_t records_per_device = 1000;
  std::uint64_t image_bytes = 3 * 224 * 224;
  // Per-sample MACs of the new backbone; unset uses the trained new embedder.
  std::optional<std::uint64_t> new_model_macs;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Fct;
  std::string name = "experiment";
  SeedConfig seeds;
  DomainConfig domain;
  DataConfig data;
  ModelConfig model;
  SideInfoSpec side_info;
  LossKind loss = LossKind::Mse;
  TrainConfig train_embedder;
  TrainConfig train_side_info;
  TrainConfig train_transformation;
  std::vector<std::size_t> ks{1, 5};
  bool zero_side_baseline = true;
  CostConfig costs;
  std::string output_dir = "out";

  // Cross-field checks; throws ConfigError.
  void validate() const;
};

// Parses the JSON document. Unknown keys anywhere are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
// Resolved configuration (derived seeds filled in), stable key order.
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace fct::io
