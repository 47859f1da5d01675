#include "fct/models/embedder.hpp"

#include "fct/error.hpp"

namespace fct {

Matrix EmbedderNet::forward_logits(const Matrix& inputs, Mode mode) {
  return head.forward(backbone.forward(inputs, mode));
}

void EmbedderNet::backward_logits(const Matrix& grad_logits) {
  backbone.backward(head.backward(grad_logits));
}

void EmbedderNet::zero_grad() {
  backbone.zero_grad();
  head.zero_grad();
}

void EmbedderNet::collect_params(std::vector<ParamRef>& out) {
  backbone.collect_params(out);
  head.collect_params(out);
}

Matrix embed(const EmbedderNet& net, const Matrix& inputs, Mode mode) { return net.embed(inputs, mode); }

EmbedderNet build_embedder(std::size_t input_dim, std::size_t hidden, std::size_t depth,
                           std::size_t embedding_dim, std::size_t num_classes, std::uint64_t seed) {
  if (input_dim == 0 || embedding_dim == 0 || num_classes == 0 || (depth > 0 && hidden == 0)) {
    throw ConfigError("embedder dims must be >= 1");
  }
  Rng rng(seed);
  std::vector<std::size_t> widths{input_dim};
  for (std::size_t i = 0; i < depth; ++i) widths.push_back(hidden);
  widths.push_back(embedding_dim);
  EmbedderNet net;
  net.backbone = make_mlp(widths, true, true, rng);
  net.head = AffineLayer::uniform_init(embedding_dim, num_classes, rng);
  return net;
}

}  // namespace fct
