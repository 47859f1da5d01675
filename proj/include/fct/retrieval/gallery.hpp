#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fct/numerics/matrix.hpp"

namespace fct {

// Stored embeddings of a gallery under one model version. Records are held
// column-wise: row i of `embeddings` and `side_info` belongs to ids[i].
class GalleryStore {
 public:
  GalleryStore() = default;
  // Validates the invariants: unique ids, consistent row counts, and unit
  // norm rows (within 1e-6) when `normalized` is set.
  GalleryStore(std::vector<std::uint64_t> ids, std::vector<std::uint32_t> labels, Matrix embeddings,
               Matrix side_info, std::uint32_t version, bool normalized);

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  std::size_t d_emb() const { return static_cast<std::size_t>(embeddings_.cols()); }
  std::size_t d_side() const { return static_cast<std::size_t>(side_info_.cols()); }
  std::uint32_t version() const { return version_; }
  bool normalized() const { return normalized_; }

  const std::vector<std::uint64_t>& ids() const { return ids_; }
  const std::vector<std::uint32_t>& labels() const { return labels_; }
  const Matrix& embeddings() const { return embeddings_; }
  const Matrix& side_info() const { return side_info_; }

  // Rounds every value to the nearest 32-bit float (the persisted precision).
  GalleryStore quantized_f32() const;

  friend bool operator==(const GalleryStore& a, const GalleryStore& b);

 private:
  std::vector<std::uint64_t> ids_;
  std::vector<std::uint32_t> labels_;
  Matrix embeddings_;
  Matrix side_info_;
  std::uint32_t version_ = 1;
  bool normalized_ = false;
};

// Query side of an evaluation: ids, class labels and embeddings.
struct QuerySet {
  std::vector<std::uint64_t> ids;
  std::vector<std::uint32_t> labels;
  Matrix embeddings;

  std::size_t size() const { return ids.size(); }
};

Matrix quantize_f32(const Matrix& m);

}  // namespace fct
