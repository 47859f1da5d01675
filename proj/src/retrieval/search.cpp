#include "fct/retrieval/search.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "fct/error.hpp"

namespace fct {

std::vector<std::size_t> knn_rank_rows(std::span<const double> query, const GalleryStore& gallery,
                                       std::optional<std::uint64_t> exclude_id) {
  if (gallery.empty()) throw StateError("knn_rank: empty gallery");
  if (query.size() != gallery.d_emb()) {
    throw ShapeError("knn_rank: query dim " + std::to_string(query.size()) + " vs gallery dim " +
                     std::to_string(gallery.d_emb()));
  }
  const Matrix& emb = gallery.embeddings();
  const auto& ids = gallery.ids();
  const std::size_t n = gallery.size();
  const std::size_t d = query.size();

  std::vector<double> dist(n);
  std::vector<std::size_t> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (exclude_id && ids[i] == *exclude_id) continue;
    const double* g = emb.data() + i * d;
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = query[j] - g[j];
      acc += diff * diff;
    }
    dist[i] = acc;
    rows.push_back(i);
  }
  std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return ids[a] < ids[b];
  });
  return rows;
}

std::vector<std::uint64_t> knn_rank(std::span<const double> query, const GalleryStore& gallery,
                                    std::optional<std::uint64_t> exclude_id) {
  const auto rows = knn_rank_rows(query, gallery, exclude_id);
  std::vector<std::uint64_t> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(gallery.ids()[r]);
  return out;
}

}  // namespace fct
