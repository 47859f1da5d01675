#include "fct/io/checkpoint.hpp"

#include "fct/error.hpp"
#include "fct/io/binary.hpp"

namespace fct::io {

namespace {

constexpr std::string_view kMagic = "FCTN";
constexpr std::uint32_t kFormat = 1;

enum : std::uint8_t { kAffine = 0, kBatchNorm = 1, kRelu = 2 };

void put_matrix(ByteWriter& w, const Matrix& m) {
  w.u32(static_cast<std::uint32_t>(m.rows()));
  w.u32(static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) w.f64(m.data()[i]);
}

Matrix get_matrix(ByteReader& r) {
  const std::uint32_t rows = r.u32();
  const std::uint32_t cols = r.u32();
  if (std::uint64_t{rows} * cols * 8 > r.remaining()) throw CorruptionError("checkpoint: matrix exceeds file");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.f64();
  return m;
}

void put_affine(ByteWriter& w, const AffineLayer& a) {
  put_matrix(w, a.weight);
  put_matrix(w, a.bias);
}

AffineLayer get_affine(ByteReader& r) {
  Matrix weight = get_matrix(r);
  Matrix bias = get_matrix(r);
  if (bias.rows() != 1 || bias.cols() != weight.cols()) throw CorruptionError("checkpoint: bias shape");
  AffineLayer a(static_cast<std::size_t>(weight.rows()), static_cast<std::size_t>(weight.cols()));
  a.weight = std::move(weight);
  a.bias = std::move(bias);
  return a;
}

void put_sequential(ByteWriter& w, const Sequential& net) {
  w.u32(static_cast<std::uint32_t>(net.layers().size()));
  for (const auto& layer : net.layers()) {
    if (const auto* a = std::get_if<AffineLayer>(&layer)) {
      w.u8(kAffine);
      put_affine(w, *a);
    } else if (const auto* b = std::get_if<BatchNormLayer>(&layer)) {
      w.u8(kBatchNorm);
      w.f64(b->momentum);
      w.f64(b->eps);
      w.u8(b->stats_frozen() ? 1 : 0);
      put_matrix(w, b->gamma);
      put_matrix(w, b->beta);
      put_matrix(w, b->running_mean);
      put_matrix(w, b->running_var);
    } else {
      w.u8(kRelu);
      w.u32(static_cast<std::uint32_t>(std::get<ReluLayer>(layer).features()));
    }
  }
}

Sequential get_sequential(ByteReader& r) {
  const std::uint32_t n = r.u32();
  Sequential net;
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint8_t tag = r.u8();
    if (tag == kAffine) {
      net.push(get_affine(r));
    } else if (tag == kBatchNorm) {
      const double momentum = r.f64();
      const double eps = r.f64();
      const bool frozen = r.u8() != 0;
      Matrix gamma = get_matrix(r);
      BatchNormLayer bn(static_cast<std::size_t>(gamma.cols()), momentum, eps);
      bn.gamma = std::move(gamma);
      bn.beta = get_matrix(r);
      bn.running_mean = get_matrix(r);
      bn.running_var = get_matrix(r);
      if (bn.beta.cols() != bn.gamma.cols() || bn.running_mean.cols() != bn.gamma.cols() ||
          bn.running_var.cols() != bn.gamma.cols()) {
        throw CorruptionError("checkpoint: batchnorm shapes disagree");
      }
      if (frozen) bn.freeze_stats();
      net.push(std::move(bn));
    } else if (tag == kRelu) {
      net.push(ReluLayer(r.u32()));
    } else {
      throw CorruptionError("checkpoint: unknown layer tag " + std::to_string(tag));
    }
  }
  return net;
}

void write_checkpoint(const std::filesystem::path& path, std::string_view kind, const ByteWriter& body) {
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kFormat);
  w.str(kind);
  w.bytes(body.data());
  w.u32(crc32(w.data()));
  write_file_atomic(path, w.data());
}

// Verifies framing and returns a reader positioned at the body.
ByteReader open_checkpoint(const std::string& bytes, std::string_view expected_kind) {
  if (bytes.size() < 4 + 4 + 4 + 4) throw CorruptionError("checkpoint too short");
  const std::string_view body(bytes.data(), bytes.size() - 4);
  ByteReader tail(std::string_view(bytes).substr(bytes.size() - 4));
  if (tail.u32() != crc32(body)) throw CorruptionError("checkpoint: CRC mismatch");
  ByteReader r(body);
  if (r.bytes(4) != kMagic) throw CorruptionError("checkpoint: bad magic");
  if (r.u32() != kFormat) throw CorruptionError("checkpoint: unsupported format version");
  const std::string kind = r.str();
  if (kind != expected_kind) {
    throw CorruptionError("checkpoint holds a " + kind + ", expected " + std::string(expected_kind));
  }
  return r;
}

template <typename T, typename Fn>
T decode(const std::filesystem::path& path, std::string_view kind, Fn&& fn) {
  const std::string bytes = read_file(path);
  ByteReader r = open_checkpoint(bytes, kind);
  try {
    T out = fn(r);
    if (r.remaining() != 0) throw CorruptionError("checkpoint: trailing bytes");
    return out;
  } catch (const CorruptionError&) {
    throw;
  } catch (const Error& e) {
    throw CorruptionError(std::string("checkpoint: ") + e.what());
  }
}

}  // namespace

void save_checkpoint(const EmbedderNet& net, const std::filesystem::path& path) {
  ByteWriter body;
  put_sequential(body, net.backbone);
  put_affine(body, net.head);
  write_checkpoint(path, "embedder", body);
}

void save_checkpoint(const TransformationNet& net, const std::filesystem::path& path) {
  ByteWriter body;
  body.u32(static_cast<std::uint32_t>(net.dims().d_old));
  body.u32(static_cast<std::uint32_t>(net.dims().d_side));
  body.u32(static_cast<std::uint32_t>(net.dims().d_new));
  body.f64(net.width_multiplier());
  body.u8(net.normalize_output() ? 1 : 0);
  put_sequential(body, net.proj_old());
  put_sequential(body, net.proj_side());
  put_sequential(body, net.mixer());
  write_checkpoint(path, "transformation", body);
}

void save_checkpoint(const SideInfoModel& model, const std::filesystem::path& path) {
  ByteWriter body;
  body.str(to_string(model.kind));
  body.u32(static_cast<std::uint32_t>(model.input_dim));
  body.u32(static_cast<std::uint32_t>(model.dim));
  put_sequential(body, model.net);
  write_checkpoint(path, "side_info", body);
}

EmbedderNet load_embedder(const std::filesystem::path& path) {
  return decode<EmbedderNet>(path, "embedder", [](ByteReader& r) {
    EmbedderNet net;
    net.backbone = get_sequential(r);
    net.head = get_affine(r);
    if (net.head.in() != net.backbone.out_dim()) throw CorruptionError("checkpoint: head/backbone mismatch");
    return net;
  });
}

TransformationNet load_transformation(const std::filesystem::path& path) {
  return decode<TransformationNet>(path, "transformation", [](ByteReader& r) {
    TransformationDims dims;
    dims.d_old = r.u32();
    dims.d_side = r.u32();
    dims.d_new = r.u32();
    const double width = r.f64();
    const bool normalize = r.u8() != 0;
    Sequential proj_old = get_sequential(r);
    Sequential proj_side = get_sequential(r);
    Sequential mixer = get_sequential(r);
    return TransformationNet(dims, width, normalize, std::move(proj_old), std::move(proj_side), std::move(mixer));
  });
}

SideInfoModel load_side_info(const std::filesystem::path& path) {
  return decode<SideInfoModel>(path, "side_info", [](ByteReader& r) {
    SideInfoModel m;
    m.kind = parse_side_info_kind(r.str());
    m.input_dim = r.u32();
    m.dim = r.u32();
    m.net = get_sequential(r);
    if (m.kind != SideInfoKind::Zero && (m.net.in_dim() != m.input_dim || m.net.out_dim() != m.dim)) {
      throw CorruptionError("checkpoint: side-information network dims disagree with header");
    }
    return m;
  });
}

}  // namespace fct::io
