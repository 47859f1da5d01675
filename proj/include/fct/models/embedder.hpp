#pragma once

#include <cstdint>

#include "fct/models/sequential.hpp"

namespace fct {

// phi: R^D -> R^d. Backbone is [Affine, BN, ReLU] x depth then Affine(H -> d).
// The classifier head maps embeddings to class logits and is only used by
// training (and as the frozen head of the KL distillation losses).
struct EmbedderNet {
  Sequential backbone;
  AffineLayer head;

  std::size_t input_dim() const { return backbone.in_dim(); }
  std::size_t embedding_dim() const { return backbone.out_dim(); }
  std::size_t num_classes() const { return head.out(); }

  Matrix embed(const Matrix& inputs, Mode mode) const { return backbone.infer(inputs, mode); }

  // Training path: caches activations for backward().
  Matrix forward_logits(const Matrix& inputs, Mode mode);
  void backward_logits(const Matrix& grad_logits);

  void zero_grad();
  void collect_params(std::vector<ParamRef>& out);
};

Matrix embed(const EmbedderNet& net, const Matrix& inputs, Mode mode = Mode::Eval);

// depth = 0 gives a single Affine(D -> d).
EmbedderNet build_embedder(std::size_t input_dim, std::size_t hidden, std::size_t depth,
                           std::size_t embedding_dim, std::size_t num_classes, std::uint64_t seed);

}  // namespace fct
