#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fct/models/transformation.hpp"
#include "fct/retrieval/gallery.hpp"

namespace fct {

enum class UpdateStrategy { FullBackfillCentral, FullBackfillDownload, FctTransform, NoUpdate };

std::string to_string(UpdateStrategy s);

// One hop of the stored gallery: h rewrites embeddings, g (optional) rewrites
// side-information. Without g the update is terminal and side-info is dropped.
struct UpdateStep {
  const TransformationNet* h = nullptr;
  const TransformationNet* g = nullptr;
};

struct UpdatePlan {
  UpdateStrategy strategy = UpdateStrategy::FctTransform;
  std::uint32_t from_version = 1;
  std::uint32_t to_version = 2;
  UpdateStep step;
};

// Applies h (and g) to every record in Eval mode, `batch_size` records at a
// time. Ids and labels are preserved; the version becomes `to_version`, which
// must be greater than the gallery's.
GalleryStore apply_fct_update(const GalleryStore& gallery, const TransformationNet& h,
                              const TransformationNet* g, std::uint32_t to_version,
                              std::size_t batch_size = 1024);

// Checks the plan's from_version against the gallery before applying it.
GalleryStore apply_plan(const GalleryStore& gallery, const UpdatePlan& plan, std::size_t batch_size = 1024);

// v_i -> v_{i+1} -> ... one hop per chain element; every hop but the last
// must carry a g. Versions advance by one per hop.
GalleryStore apply_sequence(const GalleryStore& gallery, const std::vector<UpdateStep>& chain,
                            std::size_t batch_size = 1024);

// Single long hop v_i -> v_{i+k} with a transformation trained for it.
GalleryStore apply_direct(const GalleryStore& gallery, const TransformationNet& h, std::uint32_t to_version,
                          std::size_t batch_size = 1024);

}  // namespace fct
