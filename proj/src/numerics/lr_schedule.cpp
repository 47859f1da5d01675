#include "fct/numerics/lr_schedule.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fct/error.hpp"

namespace fct {

void LrSchedule::validate() const {
  if (total_epochs == 0 || warmup_epochs >= total_epochs) {
    throw ConfigError("lr schedule needs 0 <= warmup_epochs < total_epochs (got warmup " +
                      std::to_string(warmup_epochs) + ", total " + std::to_string(total_epochs) + ")");
  }
  if (!(base_lr > 0.0) || !std::isfinite(base_lr)) throw ConfigError("lr schedule base_lr must be positive");
}

double lr_at_epoch(const LrSchedule& sched, std::size_t epoch) {
  sched.validate();
  if (epoch >= sched.total_epochs) {
    throw ConfigError("epoch " + std::to_string(epoch) + " outside schedule of " +
                      std::to_string(sched.total_epochs) + " epochs");
  }
  if (epoch < sched.warmup_epochs) {
    return sched.base_lr * static_cast<double>(epoch + 1) / static_cast<double>(sched.warmup_epochs);
  }
  const double progress = static_cast<double>(epoch - sched.warmup_epochs) /
                          static_cast<double>(sched.total_epochs - sched.warmup_epochs);
  return 0.5 * sched.base_lr * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace fct
