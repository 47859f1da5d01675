#pragma once

#include <string>
#include <vector>

#include "fct/retrieval/report.hpp"
#include "fct/training/config.hpp"
#include "fct/update/cost.hpp"

namespace fct::io {

enum class ReportFormat { Csv, Json };

// Columns: case,cmc_top1,cmc_top5,map,cka; one row per pairing; fractions
// with 4 decimals; an absent CKA is an empty field.
std::string retrieval_csv(const std::vector<RetrievalReport>& reports);
// Columns: case,group,cmc_top1,cmc_top5; one row per (pairing, group).
std::string per_group_csv(const std::vector<RetrievalReport>& reports);
std::string retrieval_json(const std::vector<RetrievalReport>& reports);
std::string emit_report(const std::vector<RetrievalReport>& reports, ReportFormat format);

std::string cost_csv(const UpdateCostReport& report);
std::string cost_json(const UpdateCostReport& report);

// Columns: epoch,loss with the loss printed round-trip exact.
std::string loss_history_csv(const TrainHistory& history);

std::string format_fixed4(double v);

}  // namespace fct::io
