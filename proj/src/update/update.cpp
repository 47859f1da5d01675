#include "fct/update/update.hpp"

#include <algorithm>
#include <string>

#include "fct/error.hpp"

namespace fct {

std::string to_string(UpdateStrategy s) {
  switch (s) {
    case UpdateStrategy::FullBackfillCentral: return "full_backfill_central";
    case UpdateStrategy::FullBackfillDownload: return "full_backfill_download";
    case UpdateStrategy::FctTransform: return "fct_transform";
    case UpdateStrategy::NoUpdate: return "no_update";
  }
  return "no_update";
}

GalleryStore apply_fct_update(const GalleryStore& gallery, const TransformationNet& h,
                              const TransformationNet* g, std::uint32_t to_version, std::size_t batch_size) {
  if (to_version <= gallery.version()) {
    throw StateError("update to version " + std::to_string(to_version) + " from version " +
                     std::to_string(gallery.version()) + " is a regression");
  }
  if (h.dims().d_old != gallery.d_emb() || h.dims().d_side != gallery.d_side()) {
    throw ShapeError("update: h expects (" + std::to_string(h.dims().d_old) + ", " +
                     std::to_string(h.dims().d_side) + ") but the gallery stores (" +
                     std::to_string(gallery.d_emb()) + ", " + std::to_string(gallery.d_side()) + ")");
  }
  if (g && (g->dims().d_old != gallery.d_emb() || g->dims().d_side != gallery.d_side())) {
    throw ShapeError("update: g input dims do not match the gallery");
  }
  if (batch_size == 0) throw ConfigError("update batch_size must be >= 1");

  const auto n = static_cast<Eigen::Index>(gallery.size());
  Matrix emb(n, static_cast<Eigen::Index>(h.dims().d_new));
  Matrix side(n, g ? static_cast<Eigen::Index>(g->dims().d_new) : 0);
  for (Eigen::Index start = 0; start < n; start += static_cast<Eigen::Index>(batch_size)) {
    const Eigen::Index len = std::min<Eigen::Index>(static_cast<Eigen::Index>(batch_size), n - start);
    const Matrix old_block = gallery.embeddings().middleRows(start, len);
    const Matrix side_block = gallery.side_info().middleRows(start, len);
    emb.middleRows(start, len) = h.infer(old_block, side_block, Mode::Eval);
    if (g) side.middleRows(start, len) = g->infer(old_block, side_block, Mode::Eval);
  }
  return GalleryStore(gallery.ids(), gallery.labels(), std::move(emb), std::move(side), to_version,
                      h.normalize_output());
}

GalleryStore apply_plan(const GalleryStore& gallery, const UpdatePlan& plan, std::size_t batch_size) {
  if (plan.from_version != gallery.version()) {
    throw StateError("plan expects gallery version " + std::to_string(plan.from_version) + ", found " +
                     std::to_string(gallery.version()));
  }
  if (plan.to_version <= plan.from_version) throw StateError("plan does not advance the version");
  switch (plan.strategy) {
    case UpdateStrategy::FctTransform:
      if (!plan.step.h) throw ConfigError("fct plan without a transformation");
      return apply_fct_update(gallery, *plan.step.h, plan.step.g, plan.to_version, batch_size);
    case UpdateStrategy::NoUpdate:
      return GalleryStore(gallery.ids(), gallery.labels(), gallery.embeddings(), gallery.side_info(),
                          plan.to_version, gallery.normalized());
    case UpdateStrategy::FullBackfillCentral:
    case UpdateStrategy::FullBackfillDownload:
      throw ConfigError("backfill strategies recompute from raw inputs; use the new model directly");
  }
  throw ConfigError("unknown strategy");
}

GalleryStore apply_sequence(const GalleryStore& gallery, const std::vector<UpdateStep>& chain,
                            std::size_t batch_size) {
  if (chain.empty()) throw ConfigError("empty update chain");
  GalleryStore current = gallery;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (!chain[i].h) throw ConfigError("update chain hop " + std::to_string(i) + " has no h");
    if (i + 1 < chain.size() && !chain[i].g) {
      throw ShapeError("broken chain: hop " + std::to_string(i) + " drops side-information needed by hop " +
                       std::to_string(i + 1));
    }
    current = apply_fct_update(current, *chain[i].h, chain[i].g, current.version() + 1, batch_size);
  }
  return current;
}

GalleryStore apply_direct(const GalleryStore& gallery, const TransformationNet& h, std::uint32_t to_version,
                          std::size_t batch_size) {
  return apply_fct_update(gallery, h, nullptr, to_version, batch_size);
}

}  // namespace fct
