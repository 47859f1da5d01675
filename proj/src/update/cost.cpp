#include "fct/update/cost.hpp"

#include <limits>

#include "fct/error.hpp"

namespace fct {

namespace {

std::uint64_t mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    throw NumericError("cost model: 64-bit overflow");
  }
  return a * b;
}

std::uint64_t add(std::uint64_t a, std::uint64_t b) {
  if (b > std::numeric_limits<std::uint64_t>::max() - a) throw NumericError("cost model: 64-bit overflow");
  return a + b;
}

}  // namespace

std::uint64_t DeploymentModel::total_records() const { return mul(device_count, records_per_device); }

std::uint64_t DeploymentModel::transformation_weight_bytes() const {
  return mul(add(h_params, g_params), bytes_per_value);
}

DeploymentModel deployment_for(std::uint64_t device_count, std::uint64_t records_per_device,
                               std::uint64_t new_model_macs, const TransformationNet& h,
                               const TransformationNet* g) {
  DeploymentModel d;
  d.device_count = device_count;
  d.records_per_device = records_per_device;
  d.new_model_macs = new_model_macs;
  d.d_new = h.dims().d_new;
  d.d_side = g ? g->dims().d_new : 0;
  d.h_macs = count_macs(h);
  d.h_params = count_params(h);
  if (g) {
    d.g_macs = count_macs(*g);
    d.g_params = count_params(*g);
  }
  return d;
}

StrategyCost strategy_cost(const DeploymentModel& d, UpdateStrategy strategy) {
  StrategyCost c;
  c.strategy = strategy;
  const std::uint64_t records = d.total_records();
  const std::uint64_t embedding_bytes = mul(d.d_new, d.bytes_per_value);
  switch (strategy) {
    case UpdateStrategy::FullBackfillCentral:
      c.server_macs = mul(d.new_model_macs, records);
      c.bytes_transferred_server_to_device = mul(embedding_bytes, records);
      c.bytes_stored_per_record = embedding_bytes;
      break;
    case UpdateStrategy::FullBackfillDownload:
      c.device_macs = mul(d.new_model_macs, records);
      c.bytes_transferred_server_to_device = mul(mul(d.image_bytes, d.records_per_device), d.device_count);
      c.bytes_stored_per_record = embedding_bytes;
      break;
    case UpdateStrategy::FctTransform:
      c.device_macs = mul(add(d.h_macs, d.g_macs), records);
      c.bytes_transferred_server_to_device = mul(d.transformation_weight_bytes(), d.device_count);
      c.bytes_stored_per_record = mul(add(d.d_new, d.d_side), d.bytes_per_value);
      break;
    case UpdateStrategy::NoUpdate:
      break;
  }
  return c;
}

UpdateCostReport cost_report(const DeploymentModel& deployment) {
  UpdateCostReport r;
  for (auto s : {UpdateStrategy::FullBackfillCentral, UpdateStrategy::FullBackfillDownload,
                 UpdateStrategy::FctTransform, UpdateStrategy::NoUpdate}) {
    r.strategies.push_back(strategy_cost(deployment, s));
  }
  return r;
}

const StrategyCost& UpdateCostReport::at(UpdateStrategy s) const {
  for (const auto& c : strategies) {
    if (c.strategy == s) return c;
  }
  throw StateError("cost report has no entry for " + to_string(s));
}

}  // namespace fct
