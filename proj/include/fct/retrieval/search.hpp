#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fct/retrieval/gallery.hpp"

namespace fct {

// Gallery row indices ordered by ascending squared L2 distance to the query,
// ties by ascending record id. The row holding `exclude_id` is dropped.
std::vector<std::size_t> knn_rank_rows(std::span<const double> query, const GalleryStore& gallery,
                                       std::optional<std::uint64_t> exclude_id = std::nullopt);

// Same ordering, returned as record ids.
std::vector<std::uint64_t> knn_rank(std::span<const double> query, const GalleryStore& gallery,
                                    std::optional<std::uint64_t> exclude_id = std::nullopt);

}  // namespace fct
