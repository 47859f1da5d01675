#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fct/retrieval/metrics.hpp"

namespace fct {

struct RetrievalReport {
  std::string case_name;  // "query / gallery", e.g. "new/h(old,psi)"
  std::map<std::size_t, double> cmc;
  double map_at_1 = 0.0;
  std::map<std::string, std::map<std::size_t, double>> per_group_cmc;
  std::optional<double> cka;
  std::size_t query_count = 0;
  std::size_t skipped_queries = 0;
};

struct PairingOptions {
  std::vector<std::size_t> ks{1, 5};
  // Class label -> group name for the per-group breakdown; empty disables it.
  // Classes missing from the map fall into "other".
  std::map<std::uint32_t, std::string> groups;
  EvalOptions eval;
};

// Evaluates one (query representation, gallery representation) pairing.
// `cka_pair`, when given, is (gallery embedding, side-information) over the
// same rows and is reported as linear CKA.
RetrievalReport evaluate_pairing(const std::string& case_name, const QuerySet& queries,
                                 const GalleryStore& gallery, const PairingOptions& options,
                                 const std::optional<std::pair<Matrix, Matrix>>& cka_pair = std::nullopt);

}  // namespace fct
