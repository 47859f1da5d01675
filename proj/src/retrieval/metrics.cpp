#include "fct/retrieval/metrics.hpp"

#include <algorithm>
#include <memory>
#include <string>
#include <thread>

#include "fct/error.hpp"
#include "fct/retrieval/search.hpp"

namespace fct {

double average_precision(std::span<const bool> relevant_in_rank_order) {
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < relevant_in_rank_order.size(); ++i) {
    if (!relevant_in_rank_order[i]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

namespace {

QueryOutcome evaluate_one(const QuerySet& queries, std::size_t q, const GalleryStore& gallery,
                          const EvalOptions& options) {
  const auto d = static_cast<std::size_t>(queries.embeddings.cols());
  std::span<const double> emb(queries.embeddings.data() + q * d, d);
  std::optional<std::uint64_t> exclude;
  if (options.exclude_self) exclude = queries.ids[q];
  const auto rows = knn_rank_rows(emb, gallery, exclude);

  const auto relevant = std::make_unique<bool[]>(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) relevant[r] = gallery.labels()[rows[r]] == queries.labels[q];

  QueryOutcome out;
  const bool* begin = relevant.get();
  const bool* first = std::find(begin, begin + rows.size(), true);
  if (first == begin + rows.size()) return out;
  out.evaluated = true;
  out.first_hit = static_cast<std::size_t>(first - begin) + 1;
  out.average_precision = average_precision(std::span<const bool>(begin, rows.size()));
  return out;
}

}  // namespace

std::vector<QueryOutcome> evaluate_queries(const QuerySet& queries, const GalleryStore& gallery,
                                           const EvalOptions& options) {
  const std::size_t n = queries.size();
  if (queries.labels.size() != n || static_cast<std::size_t>(queries.embeddings.rows()) != n) {
    throw ShapeError("query set: ids, labels and embeddings must have equal counts");
  }
  if (gallery.empty()) throw StateError("evaluation against an empty gallery");
  if (static_cast<std::size_t>(queries.embeddings.cols()) != gallery.d_emb()) {
    throw ShapeError("query dim " + std::to_string(queries.embeddings.cols()) + " vs gallery dim " +
                     std::to_string(gallery.d_emb()));
  }
  std::vector<QueryOutcome> outcomes(n);
  const std::size_t workers = std::max<std::size_t>(1, std::min(options.threads, n));
  if (workers == 1) {
    for (std::size_t q = 0; q < n; ++q) outcomes[q] = evaluate_one(queries, q, gallery, options);
    return outcomes;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    pool.emplace_back([&, begin, end] {
      for (std::size_t q = begin; q < end; ++q) outcomes[q] = evaluate_one(queries, q, gallery, options);
    });
  }
  for (auto& t : pool) t.join();
  return outcomes;
}

CmcResult cmc_from_outcomes(std::span<const QueryOutcome> outcomes, std::span<const std::size_t> ks) {
  CmcResult res;
  std::vector<std::size_t> hits(ks.size(), 0);
  for (const auto& o : outcomes) {
    if (!o.evaluated) {
      ++res.skipped;
      continue;
    }
    ++res.evaluated;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      if (o.first_hit <= ks[i]) ++hits[i];
    }
  }
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] == 0) throw ConfigError("cmc: k must be >= 1");
    res.top_k[ks[i]] =
        res.evaluated == 0 ? 0.0 : static_cast<double>(hits[i]) / static_cast<double>(res.evaluated);
  }
  return res;
}

MapResult map_from_outcomes(std::span<const QueryOutcome> outcomes) {
  MapResult res;
  double sum = 0.0;
  for (const auto& o : outcomes) {
    if (!o.evaluated) {
      ++res.skipped;
      continue;
    }
    ++res.evaluated;
    sum += o.average_precision;
  }
  res.value = res.evaluated == 0 ? 0.0 : sum / static_cast<double>(res.evaluated);
  return res;
}

CmcResult cmc(const QuerySet& queries, const GalleryStore& gallery, std::span<const std::size_t> ks,
              const EvalOptions& options) {
  const auto outcomes = evaluate_queries(queries, gallery, options);
  return cmc_from_outcomes(outcomes, ks);
}

MapResult map_at_1(const QuerySet& queries, const GalleryStore& gallery, const EvalOptions& options) {
  const auto outcomes = evaluate_queries(queries, gallery, options);
  return map_from_outcomes(outcomes);
}

}  // namespace fct
