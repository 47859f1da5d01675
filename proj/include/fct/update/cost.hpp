#pragma once

#include <cstdint>
#include <vector>

#include "fct/update/update.hpp"

namespace fct {

// Counts and sizes of a decentralized deployment: galleries live on devices,
// the server only ships models (or recomputed embeddings).
struct DeploymentModel {
  std::uint64_t device_count = 0;
  std::uint64_t records_per_device = 0;
  std::uint64_t image_bytes = 3 * 224 * 224;  // one raw uncompressed gallery item
  std::uint64_t bytes_per_value = 4;          // f32 storage
  std::uint64_t d_new = 0;                    // new embedding width
  std::uint64_t d_side = 0;                   // side-information width kept after the update
  std::uint64_t new_model_macs = 0;           // per sample
  std::uint64_t h_macs = 0;
  std::uint64_t g_macs = 0;
  std::uint64_t h_params = 0;
  std::uint64_t g_params = 0;

  std::uint64_t total_records() const;
  std::uint64_t transformation_weight_bytes() const;
};

struct StrategyCost {
  UpdateStrategy strategy = UpdateStrategy::NoUpdate;
  std::uint64_t server_macs = 0;
  std::uint64_t device_macs = 0;
  std::uint64_t bytes_transferred_server_to_device = 0;
  std::uint64_t bytes_stored_per_record = 0;
};

struct UpdateCostReport {
  std::vector<StrategyCost> strategies;

  const StrategyCost& at(UpdateStrategy s) const;
};

// Fills the MAC and parameter fields from the networks (g may be null).
DeploymentModel deployment_for(std::uint64_t device_count, std::uint64_t records_per_device,
                               std::uint64_t new_model_macs, const TransformationNet& h,
                               const TransformationNet* g);

StrategyCost strategy_cost(const DeploymentModel& deployment, UpdateStrategy strategy);

// All four strategies, in enum order.
UpdateCostReport cost_report(const DeploymentModel& deployment);

}  // namespace fct
