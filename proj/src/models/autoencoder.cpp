#include "fct/models/autoencoder.hpp"

#include "fct/error.hpp"

namespace fct {

Matrix DenseAutoencoder::forward(const Matrix& inputs) {
  return decoder.forward(encoder.forward(inputs, Mode::Train), Mode::Train);
}

void DenseAutoencoder::backward(const Matrix& grad_reconstruction) {
  encoder.backward(decoder.backward(grad_reconstruction));
}

void DenseAutoencoder::zero_grad() {
  encoder.zero_grad();
  decoder.zero_grad();
}

void DenseAutoencoder::collect_params(std::vector<ParamRef>& out) {
  encoder.collect_params(out);
  decoder.collect_params(out);
}

DenseAutoencoder build_autoencoder(std::size_t input_dim, std::size_t hidden, std::size_t depth,
                                   std::size_t code_dim, std::uint64_t seed) {
  if (input_dim == 0 || code_dim == 0 || (depth > 0 && hidden == 0)) {
    throw ConfigError("autoencoder dims must be >= 1");
  }
  Rng rng(seed);
  std::vector<std::size_t> enc{input_dim};
  for (std::size_t i = 0; i < depth; ++i) enc.push_back(hidden);
  enc.push_back(code_dim);
  std::vector<std::size_t> dec(enc.rbegin(), enc.rend());
  DenseAutoencoder ae;
  ae.encoder = make_mlp(enc, false, true, rng);
  ae.decoder = make_mlp(dec, false, true, rng);
  return ae;
}

}  // namespace fct
