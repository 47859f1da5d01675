#include "fct/models/sequential.hpp"

#include <type_traits>

#include "fct/error.hpp"

namespace fct {

Sequential::Sequential(std::vector<Layer> layers) : layers_(std::move(layers)) {}

Matrix Sequential::forward(const Matrix& input, Mode mode) {
  Matrix x = input;
  for (auto& layer : layers_) {
    x = std::visit(
        [&](auto& l) -> Matrix {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, BatchNormLayer>) {
            return l.forward(x, mode);
          } else {
            return l.forward(x);
          }
        },
        layer);
  }
  return x;
}

Matrix Sequential::infer(const Matrix& input, Mode mode) const {
  Matrix x = input;
  for (const auto& layer : layers_) {
    x = std::visit(
        [&](const auto& l) -> Matrix {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, BatchNormLayer>) {
            return l.infer(x, mode);
          } else {
            return l.infer(x);
          }
        },
        layer);
  }
  return x;
}

Matrix Sequential::backward(const Matrix& grad_out) {
  Matrix g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    g = std::visit([&](auto& l) -> Matrix { return l.backward(g); }, *it);
  }
  return g;
}

void Sequential::zero_grad() {
  for (auto& layer : layers_) {
    if (auto* a = std::get_if<AffineLayer>(&layer)) a->zero_grad();
    if (auto* b = std::get_if<BatchNormLayer>(&layer)) b->zero_grad();
  }
}

void Sequential::collect_params(std::vector<ParamRef>& out) {
  for (auto& layer : layers_) {
    if (auto* a = std::get_if<AffineLayer>(&layer)) a->collect_params(out);
    if (auto* b = std::get_if<BatchNormLayer>(&layer)) b->collect_params(out);
  }
}

void Sequential::freeze_bn_stats() {
  for (auto& layer : layers_) {
    if (auto* b = std::get_if<BatchNormLayer>(&layer)) b->freeze_stats();
  }
}

std::size_t Sequential::in_dim() const {
  for (const auto& layer : layers_) {
    if (const auto* a = std::get_if<AffineLayer>(&layer)) return a->in();
  }
  return 0;
}

std::size_t Sequential::out_dim() const {
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    if (const auto* a = std::get_if<AffineLayer>(&*it)) return a->out();
  }
  return 0;
}

std::size_t Sequential::param_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) {
    if (const auto* a = std::get_if<AffineLayer>(&layer)) n += a->param_count();
    if (const auto* b = std::get_if<BatchNormLayer>(&layer)) n += b->param_count();
  }
  return n;
}

std::size_t Sequential::mac_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) {
    if (const auto* a = std::get_if<AffineLayer>(&layer)) n += a->mac_count();
  }
  return n;
}

Sequential make_mlp(const std::vector<std::size_t>& widths, bool batchnorm, bool final_plain, Rng& rng) {
  if (widths.size() < 2) throw ConfigError("make_mlp needs at least an input and an output width");
  Sequential net;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    if (widths[i] == 0 || widths[i + 1] == 0) throw ConfigError("make_mlp: zero width");
    net.push(AffineLayer::uniform_init(widths[i], widths[i + 1], rng));
    const bool last = i + 2 == widths.size();
    if (last && final_plain) break;
    if (batchnorm) net.push(BatchNormLayer(widths[i + 1]));
    net.push(ReluLayer(widths[i + 1]));
  }
  return net;
}

}  // namespace fct
