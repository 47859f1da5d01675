#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "fct/retrieval/gallery.hpp"

namespace fct::io {

// Binary gallery layout, all little-endian:
//   "FCTG" | format u32 | flags u8 (bit0 normalized) | d_emb u32 | d_side u32
//   | count u64 | count x (id u64, class u32, d_emb f32, d_side f32)
//   | crc32 u32 over every preceding byte
// The model version of the store is not part of the layout; it travels in
// the sidecar metadata written by the CLI (see save_gallery_meta).
inline constexpr std::uint32_t kGalleryFormatVersion = 1;

std::string encode_gallery(const GalleryStore& store);
// Throws CorruptionError on bad magic, unsupported format version, count /
// length disagreement or CRC mismatch.
GalleryStore decode_gallery(const std::string& bytes, std::uint32_t model_version = 1);

void save_gallery(const GalleryStore& store, const std::filesystem::path& path);
GalleryStore load_gallery(const std::filesystem::path& path, std::uint32_t model_version = 1);

// `<path>.meta.json`: model version and free-form provenance.
void save_gallery_meta(const std::filesystem::path& gallery_path, std::uint32_t model_version,
                       const std::string& provenance);
std::uint32_t load_gallery_version(const std::filesystem::path& gallery_path);

}  // namespace fct::io
