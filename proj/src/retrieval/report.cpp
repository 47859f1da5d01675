#include "fct/retrieval/report.hpp"

#include "fct/retrieval/cka.hpp"

namespace fct {

RetrievalReport evaluate_pairing(const std::string& case_name, const QuerySet& queries,
                                 const GalleryStore& gallery, const PairingOptions& options,
                                 const std::optional<std::pair<Matrix, Matrix>>& cka_pair) {
  const auto outcomes = evaluate_queries(queries, gallery, options.eval);
  RetrievalReport report;
  report.case_name = case_name;
  const CmcResult c = cmc_from_outcomes(outcomes, options.ks);
  report.cmc = c.top_k;
  report.map_at_1 = map_from_outcomes(outcomes).value;
  report.query_count = c.evaluated;
  report.skipped_queries = c.skipped;

  if (!options.groups.empty()) {
    std::map<std::string, std::vector<QueryOutcome>> by_group;
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const auto it = options.groups.find(queries.labels[q]);
      by_group[it == options.groups.end() ? "other" : it->second].push_back(outcomes[q]);
    }
    for (const auto& [name, group_outcomes] : by_group) {
      report.per_group_cmc[name] = cmc_from_outcomes(group_outcomes, options.ks).top_k;
    }
  }
  if (cka_pair) report.cka = cka_linear(cka_pair->first, cka_pair->second);
  return report;
}

}  // namespace fct
