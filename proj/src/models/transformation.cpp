#include "fct/models/transformation.hpp"

#include <array>
#include <cmath>
#include <string>

#include "fct/error.hpp"
#include "fct/numerics/ops.hpp"

namespace fct {

TransformationNet::TransformationNet(TransformationDims dims, double width_multiplier,
                                     bool normalize_output, Sequential proj_old,
                                     Sequential proj_side, Sequential mixer)
    : dims_(dims),
      width_(width_multiplier),
      normalize_output_(normalize_output),
      proj_old_(std::move(proj_old)),
      proj_side_(std::move(proj_side)),
      mixer_(std::move(mixer)) {
  if (proj_old_.in_dim() != dims_.d_old || proj_side_.in_dim() != dims_.d_side ||
      mixer_.out_dim() != dims_.d_new) {
    throw ShapeError("transformation: branch widths do not match declared dims");
  }
  if (mixer_.in_dim() != proj_old_.out_dim() + proj_side_.out_dim()) {
    throw ShapeError("transformation: mixer input width " + std::to_string(mixer_.in_dim()) +
                     " != projection outputs " + std::to_string(proj_old_.out_dim()) + " + " +
                     std::to_string(proj_side_.out_dim()));
  }
}

void TransformationNet::check_inputs(const Matrix& old_emb, const Matrix& side) const {
  require_cols(old_emb, static_cast<Eigen::Index>(dims_.d_old), "transformation old embedding");
  require_cols(side, static_cast<Eigen::Index>(dims_.d_side), "transformation side-information");
  if (old_emb.rows() != side.rows()) {
    throw ShapeError("transformation: " + std::to_string(old_emb.rows()) + " embeddings vs " +
                     std::to_string(side.rows()) + " side-information rows");
  }
}

Matrix TransformationNet::forward(const Matrix& old_emb, const Matrix& side, Mode mode) {
  check_inputs(old_emb, side);
  const Matrix a = proj_old_.forward(old_emb, mode);
  const Matrix b = proj_side_.forward(side, mode);
  Matrix z = mixer_.forward(hconcat(a, b), mode);
  if (!normalize_output_) {
    cached_raw_output_.reset();
    return z;
  }
  Matrix y = normalize_rows(z);
  cached_raw_output_ = std::move(z);
  return y;
}

Matrix TransformationNet::infer(const Matrix& old_emb, const Matrix& side, Mode mode) const {
  check_inputs(old_emb, side);
  Matrix z = mixer_.infer(hconcat(proj_old_.infer(old_emb, mode), proj_side_.infer(side, mode)), mode);
  return normalize_output_ ? normalize_rows(z) : z;
}

std::pair<Matrix, Matrix> TransformationNet::backward(const Matrix& grad_out) {
  Matrix g = normalize_output_ ? normalize_rows_backward(*cached_raw_output_, grad_out) : grad_out;
  const Matrix g_concat = mixer_.backward(g);
  const auto split = static_cast<Eigen::Index>(proj_old_.out_dim());
  Matrix g_old = proj_old_.backward(g_concat.leftCols(split));
  Matrix g_side = proj_side_.backward(g_concat.rightCols(g_concat.cols() - split));
  return {std::move(g_old), std::move(g_side)};
}

void TransformationNet::zero_grad() {
  proj_old_.zero_grad();
  proj_side_.zero_grad();
  mixer_.zero_grad();
}

void TransformationNet::collect_params(std::vector<ParamRef>& out) {
  proj_old_.collect_params(out);
  proj_side_.collect_params(out);
  mixer_.collect_params(out);
}

void TransformationNet::freeze_bn_stats() {
  proj_old_.freeze_bn_stats();
  proj_side_.freeze_bn_stats();
  mixer_.freeze_bn_stats();
}

std::size_t scaled_width(std::size_t base, double width_multiplier) {
  constexpr std::array<double, 5> allowed{0.125, 0.25, 0.5, 1.0, 2.0};
  bool ok = false;
  for (double a : allowed) ok = ok || width_multiplier == a;
  if (!ok) {
    throw ConfigError("width multiplier " + std::to_string(width_multiplier) +
                      " not in {1/8, 1/4, 1/2, 1, 2}");
  }
  const double scaled = static_cast<double>(base) * width_multiplier;
  if (scaled != std::floor(scaled) || scaled < 1.0) {
    throw ConfigError("width " + std::to_string(base) + " * " + std::to_string(width_multiplier) +
                      " is not a positive integer");
  }
  return static_cast<std::size_t>(scaled);
}

TransformationNet build_transformation(TransformationDims dims, double width_multiplier,
                                       bool normalize_output, std::uint64_t seed) {
  if (dims.d_old == 0 || dims.d_side == 0 || dims.d_new == 0) {
    throw ConfigError("transformation dims must be >= 1");
  }
  // The multiplier sizes the mixer only; both projections stay 256 wide.
  // This reproduces the published capacity sweep: 0.79M, 1.9M, 5.7M and
  // 19.6M parameters at w = 1/4, 1/2, 1, 2 for 128-d inputs and output.
  const std::size_t proj = TransformationNet::kProjectionWidth;
  const std::size_t mix = scaled_width(TransformationNet::kMixerWidth, width_multiplier);
  Rng rng(seed);
  Sequential proj_old = make_mlp({dims.d_old, proj, proj}, true, false, rng);
  Sequential proj_side = make_mlp({dims.d_side, proj, proj}, true, false, rng);
  Sequential mixer = make_mlp({2 * proj, mix, mix, dims.d_new}, true, true, rng);
  return TransformationNet(dims, width_multiplier, normalize_output, std::move(proj_old),
                           std::move(proj_side), std::move(mixer));
}

std::size_t count_params(const Sequential& net) { return net.param_count(); }
std::size_t count_macs(const Sequential& net) { return net.mac_count(); }

std::size_t count_params(const TransformationNet& net) {
  return net.proj_old().param_count() + net.proj_side().param_count() + net.mixer().param_count();
}

std::size_t count_macs(const TransformationNet& net) {
  return net.proj_old().mac_count() + net.proj_side().mac_count() + net.mixer().mac_count();
}

}  // namespace fct
