#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fct/numerics/adam.hpp"
#include "fct/numerics/lr_schedule.hpp"
#include "fct/rng.hpp"

namespace fct {

enum class LossKind { Mse, Kl, KlReversed };

std::string to_string(LossKind kind);
LossKind parse_loss_kind(const std::string& name);

struct TrainConfig {
  std::size_t epochs = 80;
  std::size_t batch_size = 256;
  AdamConfig adam;  // adam.lr is the schedule's base learning rate
  std::size_t warmup_epochs = 5;
  // Epoch at whose start BatchNorm running statistics stop updating.
  std::optional<std::size_t> bn_freeze_epoch = 40;
  LossKind loss = LossKind::Mse;
  std::uint64_t seed = 0;
  // Called after the last batch of every epoch with the epoch index.
  std::function<void(std::size_t)> on_epoch_end;

  void validate() const;
  LrSchedule schedule() const { return {adam.lr, warmup_epochs, epochs}; }
};

// Mean training loss per epoch.
struct TrainHistory {
  std::vector<double> epoch_loss;
};

// Shuffled mini-batches of row indices for one epoch. The last incomplete
// batch is dropped; a dataset smaller than batch_size yields one batch of
// every row.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size, Rng& rng);

}  // namespace fct
