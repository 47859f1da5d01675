#pragma once

#include <cstddef>

namespace fct {

// One-cycle cosine annealing with linear warmup, evaluated per epoch.
struct LrSchedule {
  double base_lr = 5e-4;
  std::size_t warmup_epochs = 5;
  std::size_t total_epochs = 80;

  void validate() const;
};

// epoch < warmup : base * (epoch + 1) / warmup
// otherwise      : 0.5 * base * (1 + cos(pi * (epoch - warmup) / (total - warmup)))
double lr_at_epoch(const LrSchedule& sched, std::size_t epoch);

}  // namespace fct
