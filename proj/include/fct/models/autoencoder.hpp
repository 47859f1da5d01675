#pragma once

#include <cstdint>

#include "fct/models/sequential.hpp"

namespace fct {

// Dense encoder/decoder pair trained with an L2 reconstruction loss.
// encoder: [Affine, ReLU] x depth then Affine(H -> d_side); decoder mirrors it.
struct DenseAutoencoder {
  Sequential encoder;
  Sequential decoder;

  std::size_t input_dim() const { return encoder.in_dim(); }
  std::size_t code_dim() const { return encoder.out_dim(); }

  Matrix encode(const Matrix& inputs) const { return encoder.infer(inputs); }
  Matrix reconstruct(const Matrix& inputs) const { return decoder.infer(encoder.infer(inputs)); }

  Matrix forward(const Matrix& inputs);
  void backward(const Matrix& grad_reconstruction);
  void zero_grad();
  void collect_params(std::vector<ParamRef>& out);
};

DenseAutoencoder build_autoencoder(std::size_t input_dim, std::size_t hidden, std::size_t depth,
                                   std::size_t code_dim, std::uint64_t seed);

}  // namespace fct
