#pragma once

#include <string>

#include "fct/models/sequential.hpp"
#include "fct/synthdata/domain.hpp"
#include "fct/training/config.hpp"

namespace fct {

enum class SideInfoKind { Zero, Autoencoder, AlternateModel, MixupModel, Contrastive };

std::string to_string(SideInfoKind kind);
SideInfoKind parse_side_info_kind(const std::string& name);

struct SideInfoSpec {
  SideInfoKind kind = SideInfoKind::Autoencoder;
  std::size_t hidden = 64;
  std::size_t depth = 2;
  double mixup_alpha = 0.2;
  double temperature = 0.1;
  double augment_noise_std = 0.25;

  void validate() const;
};

// psi: R^D -> R^d_side. Zero has no network and returns zeros.
struct SideInfoModel {
  SideInfoKind kind = SideInfoKind::Zero;
  std::size_t input_dim = 0;
  std::size_t dim = 0;
  Sequential net;

  Matrix infer(const Matrix& inputs) const;
};

SideInfoModel zero_side_info(std::size_t input_dim, std::size_t d_side);

// Trains psi on `data` (the old training set):
//   Zero           : constant zero
//   Autoencoder    : encoder of an L2-reconstruction autoencoder
//   AlternateModel : embedder trained like the old model, seeded by cfg.seed
//   MixupModel     : the same with mixup inputs
//   Contrastive    : encoder trained with InfoNCE over two noise views
SideInfoModel train_side_info(const SideInfoSpec& spec, const LabeledSet& data, std::size_t d_side,
                              const TrainConfig& cfg, TrainHistory* history = nullptr);

struct InfoNceResult {
  double value = 0.0;
  Matrix grad_a;
  Matrix grad_b;
};

// Symmetric InfoNCE between row-normalized views a and b: row i of a and row
// i of b are the positive pair, other rows of the opposite view negatives.
InfoNceResult info_nce_loss(const Matrix& a, const Matrix& b, double temperature);

}  // namespace fct
