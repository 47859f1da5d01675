#include "fct/io/report_io.hpp"

#include <cstdio>

#include <json.hpp>

namespace fct::io {

std::string format_fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

namespace {

std::string cmc_field(const std::map<std::size_t, double>& cmc, std::size_t k) {
  const auto it = cmc.find(k);
  return it == cmc.end() ? std::string() : format_fixed4(it->second);
}

std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::ordered_json cmc_json(const std::map<std::size_t, double>& cmc) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : cmc) j["top" + std::to_string(k)] = std::stod(format_fixed4(v));
  return j;
}

}  // namespace

std::string retrieval_csv(const std::vector<RetrievalReport>& reports) {
  std::string out = "case,cmc_top1,cmc_top5,map,cka\n";
  for (const auto& r : reports) {
    out += r.case_name + "," + cmc_field(r.cmc, 1) + "," + cmc_field(r.cmc, 5) + "," + format_fixed4(r.map_at_1) +
           "," + (r.cka ? format_fixed4(*r.cka) : std::string()) + "\n";
  }
  return out;
}

std::string per_group_csv(const std::vector<RetrievalReport>& reports) {
  std::string out = "case,group,cmc_top1,cmc_top5\n";
  for (const auto& r : reports) {
    for (const auto& [group, cmc] : r.per_group_cmc) {
      out += r.case_name + "," + group + "," + cmc_field(cmc, 1) + "," + cmc_field(cmc, 5) + "\n";
    }
  }
  return out;
}

std::string retrieval_json(const std::vector<RetrievalReport>& reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["case"] = r.case_name;
    j["cmc"] = cmc_json(r.cmc);
    j["map"] = std::stod(format_fixed4(r.map_at_1));
    j["cka"] = r.cka ? nlohmann::ordered_json(std::stod(format_fixed4(*r.cka))) : nlohmann::ordered_json(nullptr);
    j["query_count"] = r.query_count;
    j["skipped_queries"] = r.skipped_queries;
    nlohmann::ordered_json groups = nlohmann::ordered_json::object();
    for (const auto& [g, cmc] : r.per_group_cmc) groups[g] = cmc_json(cmc);
    j["per_group_cmc"] = groups;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::string emit_report(const std::vector<RetrievalReport>& reports, ReportFormat format) {
  return format == ReportFormat::Csv ? retrieval_csv(reports) : retrieval_json(reports);
}

std::string cost_csv(const UpdateCostReport& report) {
  std::string out = "strategy,server_macs,device_macs,bytes_transferred_server_to_device,bytes_stored_per_record\n";
  for (const auto& c : report.strategies) {
    out += to_string(c.strategy) + "," + std::to_string(c.server_macs) + "," + std::to_string(c.device_macs) + "," +
           std::to_string(c.bytes_transferred_server_to_device) + "," + std::to_string(c.bytes_stored_per_record) +
           "\n";
  }
  return out;
}

std::string cost_json(const UpdateCostReport& report) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& c : report.strategies) {
    nlohmann::ordered_json j;
    j["strategy"] = to_string(c.strategy);
    j["server_macs"] = c.server_macs;
    j["device_macs"] = c.device_macs;
    j["bytes_transferred_server_to_device"] = c.bytes_transferred_server_to_device;
    j["bytes_stored_per_record"] = c.bytes_stored_per_record;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::string loss_history_csv(const TrainHistory& history) {
  std::string out = "epoch,loss\n";
  for (std::size_t e = 0; e < history.epoch_loss.size(); ++e) {
    out += std::to_string(e) + "," + exact(history.epoch_loss[e]) + "\n";
  }
  return out;
}

}  // namespace fct::io
