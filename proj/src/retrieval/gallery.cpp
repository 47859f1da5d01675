#include "fct/retrieval/gallery.hpp"

#include <cmath>
#include <unordered_set>

#include "fct/error.hpp"

namespace fct {

GalleryStore::GalleryStore(std::vector<std::uint64_t> ids, std::vector<std::uint32_t> labels,
                           Matrix embeddings, Matrix side_info, std::uint32_t version, bool normalized)
    : ids_(std::move(ids)),
      labels_(std::move(labels)),
      embeddings_(std::move(embeddings)),
      side_info_(std::move(side_info)),
      version_(version),
      normalized_(normalized) {
  const auto n = static_cast<Eigen::Index>(ids_.size());
  if (labels_.size() != ids_.size() || embeddings_.rows() != n || side_info_.rows() != n) {
    throw ShapeError("gallery: ids, labels, embeddings and side-information must have equal counts");
  }
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(ids_.size());
  for (auto id : ids_) {
    if (!seen.insert(id).second) throw StateError("gallery: duplicate id " + std::to_string(id));
  }
  require_finite(embeddings_, "gallery embeddings");
  require_finite(side_info_, "gallery side-information");
  if (normalized_) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(embeddings_.row(i).norm() - 1.0) > 1e-6) {
        throw DegenerateInputError("gallery: record " + std::to_string(ids_[static_cast<std::size_t>(i)]) +
                                   " is not unit norm in a normalized store");
      }
    }
  }
}

Matrix quantize_f32(const Matrix& m) {
  return m.cast<float>().cast<double>();
}

GalleryStore GalleryStore::quantized_f32() const {
  return GalleryStore(ids_, labels_, quantize_f32(embeddings_), quantize_f32(side_info_), version_,
                      normalized_);
}

bool operator==(const GalleryStore& a, const GalleryStore& b) {
  return a.ids_ == b.ids_ && a.labels_ == b.labels_ && a.version_ == b.version_ &&
         a.normalized_ == b.normalized_ && a.embeddings_.rows() == b.embeddings_.rows() &&
         a.embeddings_.cols() == b.embeddings_.cols() && a.side_info_.cols() == b.side_info_.cols() &&
         a.embeddings_ == b.embeddings_ && a.side_info_ == b.side_info_;
}

}  // namespace fct
