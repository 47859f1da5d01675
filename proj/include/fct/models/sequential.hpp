#pragma once

#include <cstddef>
#include <vector>

#include "fct/numerics/layers.hpp"

namespace fct {

// A chain of layers evaluated in order. Plain value: copying a Sequential
// copies its parameters, statistics and caches.
class Sequential {
 public:
  Sequential() = default;
  explicit Sequential(std::vector<Layer> layers);

  void push(Layer layer) { layers_.push_back(std::move(layer)); }

  Matrix forward(const Matrix& input, Mode mode);
  Matrix infer(const Matrix& input, Mode mode = Mode::Eval) const;
  Matrix backward(const Matrix& grad_out);

  void zero_grad();
  void collect_params(std::vector<ParamRef>& out);
  void freeze_bn_stats();

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }
  bool empty() const { return layers_.empty(); }

  // Input width of the first affine layer, output width of the last one.
  std::size_t in_dim() const;
  std::size_t out_dim() const;

  // Affine: in*out + out; BatchNorm: 2 * features.
  std::size_t param_count() const;
  // Affine in*out only.
  std::size_t mac_count() const;

 private:
  std::vector<Layer> layers_;
};

// [Affine(widths[i] -> widths[i+1]), BatchNorm, ReLU] for every hop except
// the last, which is a bare Affine when `final_plain` is set.
Sequential make_mlp(const std::vector<std::size_t>& widths, bool batchnorm, bool final_plain, Rng& rng);

}  // namespace fct
