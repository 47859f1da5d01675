#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "fct/models/sequential.hpp"

namespace fct {

struct TransformationDims {
  std::size_t d_old = 128;
  std::size_t d_side = 128;
  std::size_t d_new = 128;
};

// h(old embedding, side-information) -> new embedding.
//
//   proj_old : Affine(d_old -> 256) BN ReLU Affine(256 -> 256) BN ReLU
//   proj_side: same with d_side input
//   mixer    : Affine(512 -> 2048w) BN ReLU Affine(2048w -> 2048w) BN ReLU
//              Affine(2048w -> d_new)
//
// w is the width multiplier; it scales the mixer's hidden layers.
//
// The two projections are concatenated (old first) before the mixer.
class TransformationNet {
 public:
  static constexpr std::size_t kProjectionWidth = 256;
  static constexpr std::size_t kMixerWidth = 2048;

  TransformationNet() = default;
  TransformationNet(TransformationDims dims, double width_multiplier, bool normalize_output,
                    Sequential proj_old, Sequential proj_side, Sequential mixer);

  Matrix forward(const Matrix& old_emb, const Matrix& side, Mode mode);
  Matrix infer(const Matrix& old_emb, const Matrix& side, Mode mode = Mode::Eval) const;
  // Returns (dL/d old_emb, dL/d side) and accumulates parameter gradients.
  std::pair<Matrix, Matrix> backward(const Matrix& grad_out);

  void zero_grad();
  void collect_params(std::vector<ParamRef>& out);
  void freeze_bn_stats();

  const TransformationDims& dims() const { return dims_; }
  double width_multiplier() const { return width_; }
  bool normalize_output() const { return normalize_output_; }

  Sequential& proj_old() { return proj_old_; }
  Sequential& proj_side() { return proj_side_; }
  Sequential& mixer() { return mixer_; }
  const Sequential& proj_old() const { return proj_old_; }
  const Sequential& proj_side() const { return proj_side_; }
  const Sequential& mixer() const { return mixer_; }

 private:
  void check_inputs(const Matrix& old_emb, const Matrix& side) const;

  TransformationDims dims_;
  double width_ = 1.0;
  bool normalize_output_ = false;
  Sequential proj_old_;
  Sequential proj_side_;
  Sequential mixer_;
  std::optional<Matrix> cached_raw_output_;
};

// Hidden width `base * w`; ConfigError unless w is one of 1/8, 1/4, 1/2, 1, 2.
std::size_t scaled_width(std::size_t base, double width_multiplier);

TransformationNet build_transformation(TransformationDims dims, double width_multiplier,
                                       bool normalize_output, std::uint64_t seed);

std::size_t count_params(const TransformationNet& net);
std::size_t count_macs(const TransformationNet& net);
std::size_t count_params(const Sequential& net);
std::size_t count_macs(const Sequential& net);

}  // namespace fct
