#pragma once

#include <cstdint>
#include <vector>

#include "fct/numerics/layers.hpp"

namespace fct {

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Coupled L2: added to the gradient before the moment updates.
  double weight_decay = 3.0517578125e-5;
};

// Moment accumulators for a fixed list of parameters. The parameter list
// passed to step() must keep the same shapes and order across calls.
class AdamState {
 public:
  explicit AdamState(AdamConfig config = {}) : config_(config) {}

  void set_lr(double lr) { config_.lr = lr; }
  const AdamConfig& config() const { return config_; }
  std::uint64_t step_count() const { return step_; }

  // Applies one update. Throws NumericError on a non-finite gradient (no
  // parameter is modified in that case) and ShapeError on a layout change.
  void step(const std::vector<ParamRef>& params);

  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }

 private:
  AdamConfig config_;
  std::uint64_t step_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace fct
