#include "fct/io/gallery_file.hpp"

#include <json.hpp>

#include "fct/error.hpp"
#include "fct/io/binary.hpp"

namespace fct::io {

namespace {
constexpr std::string_view kMagic = "FCTG";
constexpr std::uint8_t kFlagNormalized = 0x01;
}  // namespace

std::string encode_gallery(const GalleryStore& store) {
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kGalleryFormatVersion);
  w.u8(store.normalized() ? kFlagNormalized : 0);
  w.u32(static_cast<std::uint32_t>(store.d_emb()));
  w.u32(static_cast<std::uint32_t>(store.d_side()));
  w.u64(store.size());
  const Matrix& emb = store.embeddings();
  const Matrix& side = store.side_info();
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    w.u64(store.ids()[i]);
    w.u32(store.labels()[i]);
    for (Eigen::Index j = 0; j < emb.cols(); ++j) w.f32(static_cast<float>(emb(r, j)));
    for (Eigen::Index j = 0; j < side.cols(); ++j) w.f32(static_cast<float>(side(r, j)));
  }
  const std::uint32_t crc = crc32(w.data());
  w.u32(crc);
  return w.take();
}

GalleryStore decode_gallery(const std::string& bytes, std::uint32_t model_version) {
  constexpr std::size_t kHeader = 4 + 4 + 1 + 4 + 4 + 8;
  if (bytes.size() < kHeader + 4) throw CorruptionError("gallery file too short");
  ByteReader r(bytes);
  if (r.bytes(4) != kMagic) throw CorruptionError("gallery file: bad magic");
  const std::uint32_t format = r.u32();
  if (format != kGalleryFormatVersion) {
    throw CorruptionError("gallery file: unsupported format version " + std::to_string(format));
  }
  const std::uint8_t flags = r.u8();
  const std::uint32_t d_emb = r.u32();
  const std::uint32_t d_side = r.u32();
  const std::uint64_t count = r.u64();
  const std::uint64_t record_bytes = 8 + 4 + 4ull * (std::uint64_t{d_emb} + d_side);
  const std::uint64_t payload = bytes.size() - kHeader - 4;
  if (record_bytes == 0 || payload % record_bytes != 0 || payload / record_bytes != count) {
    throw CorruptionError("gallery file: declared " + std::to_string(count) + " records but payload holds " +
                          std::to_string(payload) + " bytes");
  }
  const std::string_view body(bytes.data(), bytes.size() - 4);
  ByteReader tail(std::string_view(bytes).substr(bytes.size() - 4));
  if (tail.u32() != crc32(body)) throw CorruptionError("gallery file: CRC mismatch");

  std::vector<std::uint64_t> ids(count);
  std::vector<std::uint32_t> labels(count);
  Matrix emb(static_cast<Eigen::Index>(count), d_emb);
  Matrix side(static_cast<Eigen::Index>(count), d_side);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    ids[i] = r.u64();
    labels[i] = r.u32();
    for (std::uint32_t j = 0; j < d_emb; ++j) emb(row, j) = r.f32();
    for (std::uint32_t j = 0; j < d_side; ++j) side(row, j) = r.f32();
  }
  try {
    return GalleryStore(std::move(ids), std::move(labels), std::move(emb), std::move(side), model_version,
                        (flags & kFlagNormalized) != 0);
  } catch (const Error& e) {
    throw CorruptionError(std::string("gallery file: ") + e.what());
  }
}

void save_gallery(const GalleryStore& store, const std::filesystem::path& path) {
  write_file_atomic(path, encode_gallery(store));
}

GalleryStore load_gallery(const std::filesystem::path& path, std::uint32_t model_version) {
  return decode_gallery(read_file(path), model_version);
}

namespace {
std::filesystem::path meta_path(const std::filesystem::path& gallery_path) {
  std::filesystem::path p = gallery_path;
  p += ".meta.json";
  return p;
}
}  // namespace

void save_gallery_meta(const std::filesystem::path& gallery_path, std::uint32_t model_version,
                       const std::string& provenance) {
  nlohmann::ordered_json j;
  j["model_version"] = model_version;
  j["provenance"] = provenance;
  write_file_atomic(meta_path(gallery_path), j.dump(2) + "\n");
}

std::uint32_t load_gallery_version(const std::filesystem::path& gallery_path) {
  const auto p = meta_path(gallery_path);
  if (!std::filesystem::exists(p)) return 1;
  try {
    return nlohmann::json::parse(read_file(p)).at("model_version").get<std::uint32_t>();
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError("gallery metadata " + p.string() + ": " + e.what());
  }
}

}  // namespace fct::io
