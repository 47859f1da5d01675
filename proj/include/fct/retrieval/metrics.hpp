#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "fct/retrieval/gallery.hpp"

namespace fct {

struct EvalOptions {
  // A gallery record with the query's own id is removed before ranking.
  bool exclude_self = true;
  // Queries are partitioned across this many workers; results do not depend on it.
  std::size_t threads = 1;
};

// Per-query retrieval outcome.
struct QueryOutcome {
  bool evaluated = false;      // false when no same-class record is in the gallery
  std::size_t first_hit = 0;   // 1-based rank of the first same-class record
  double average_precision = 0.0;
};

std::vector<QueryOutcome> evaluate_queries(const QuerySet& queries, const GalleryStore& gallery,
                                           const EvalOptions& options = {});

// Non-interpolated AP over a full ranking: (1/R) * sum over relevant ranks r
// of precision@r. Returns 0 when nothing is relevant.
double average_precision(std::span<const bool> relevant_in_rank_order);

struct CmcResult {
  std::map<std::size_t, double> top_k;  // k -> fraction of evaluated queries
  std::size_t evaluated = 0;
  std::size_t skipped = 0;  // queries whose class is absent from the gallery
};

struct MapResult {
  double value = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};

CmcResult cmc_from_outcomes(std::span<const QueryOutcome> outcomes, std::span<const std::size_t> ks);
MapResult map_from_outcomes(std::span<const QueryOutcome> outcomes);

CmcResult cmc(const QuerySet& queries, const GalleryStore& gallery, std::span<const std::size_t> ks,
              const EvalOptions& options = {});
MapResult map_at_1(const QuerySet& queries, const GalleryStore& gallery, const EvalOptions& options = {});

}  // namespace fct
