#include "fct/numerics/layers.hpp"

#include <cmath>

#include "fct/error.hpp"

namespace fct {

// ---------------------------------------------------------------- Affine

AffineLayer::AffineLayer(std::size_t in, std::size_t out)
    : weight(Matrix::Zero(in, out)),
      bias(Matrix::Zero(1, out)),
      grad_weight(Matrix::Zero(in, out)),
      grad_bias(Matrix::Zero(1, out)) {}

AffineLayer AffineLayer::uniform_init(std::size_t in, std::size_t out, Rng& rng) {
  AffineLayer layer(in, out);
  const double bound = std::sqrt(1.0 / static_cast<double>(in));
  for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
    layer.weight.data()[i] = rng.uniform(-bound, bound);
  }
  for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
    layer.bias.data()[i] = rng.uniform(-bound, bound);
  }
  return layer;
}

Matrix AffineLayer::infer(const Matrix& input) const {
  require_cols(input, weight.rows(), "affine input");
  Matrix out = input * weight;
  out.rowwise() += bias.row(0);
  return out;
}

Matrix AffineLayer::forward(const Matrix& input) {
  Matrix out = infer(input);
  cached_input_ = input;
  return out;
}

Matrix AffineLayer::backward(const Matrix& grad_out) {
  if (!cached_input_) throw StateError("affine backward called before forward");
  require_shape(grad_out, cached_input_->rows(), weight.cols(), "affine grad_out");
  grad_weight.noalias() += cached_input_->transpose() * grad_out;
  grad_bias += grad_out.colwise().sum();
  return grad_out * weight.transpose();
}

void AffineLayer::zero_grad() {
  grad_weight.setZero(weight.rows(), weight.cols());
  grad_bias.setZero(1, bias.cols());
}

void AffineLayer::collect_params(std::vector<ParamRef>& out) {
  out.push_back({&weight, &grad_weight});
  out.push_back({&bias, &grad_bias});
}

// ---------------------------------------------------------------- BatchNorm

BatchNormLayer::BatchNormLayer(std::size_t features, double momentum_, double eps_)
    : gamma(Matrix::Ones(1, features)),
      beta(Matrix::Zero(1, features)),
      running_mean(Matrix::Zero(1, features)),
      running_var(Matrix::Ones(1, features)),
      grad_gamma(Matrix::Zero(1, features)),
      grad_beta(Matrix::Zero(1, features)),
      momentum(momentum_),
      eps(eps_) {
  if (!(momentum > 0.0 && momentum <= 1.0)) throw ConfigError("batchnorm momentum must be in (0, 1]");
  if (!(eps > 0.0)) throw ConfigError("batchnorm eps must be positive");
}

BnMode BatchNormLayer::effective_mode(Mode mode) const {
  if (mode == Mode::Eval) return BnMode::Eval;
  return stats_frozen_ ? BnMode::FrozenStats : BnMode::Train;
}

Matrix BatchNormLayer::normalize(const Matrix& input, BnMode mode, Matrix* inv_std_out,
                                 Matrix* batch_mean, Matrix* batch_var) const {
  require_cols(input, gamma.cols(), "batchnorm input");
  const Eigen::Index n = input.rows();
  Matrix mean;
  Matrix var;
  if (mode == BnMode::Train) {
    if (n < 2) throw DegenerateInputError("batchnorm in train mode needs a batch of at least 2 rows");
    mean = input.colwise().mean();
    Matrix centered = input.rowwise() - mean.row(0);
    var = centered.cwiseAbs2().colwise().sum() / static_cast<double>(n);
  } else {
    mean = running_mean;
    var = running_var;
  }
  Matrix inv_std = (var.array() + eps).rsqrt().matrix();
  Matrix xhat = (input.rowwise() - mean.row(0)).array().rowwise() * inv_std.row(0).array();
  if (inv_std_out) *inv_std_out = inv_std;
  if (batch_mean) *batch_mean = std::move(mean);
  if (batch_var) *batch_var = std::move(var);
  return xhat;
}

Matrix BatchNormLayer::infer(const Matrix& input, Mode mode) const {
  Matrix xhat = normalize(input, effective_mode(mode), nullptr, nullptr, nullptr);
  Matrix out = xhat.array().rowwise() * gamma.row(0).array();
  out.rowwise() += beta.row(0);
  return out;
}

Matrix BatchNormLayer::forward(const Matrix& input, Mode mode) {
  const BnMode bn_mode = effective_mode(mode);
  Matrix inv_std;
  Matrix mean;
  Matrix var;
  Matrix xhat = normalize(input, bn_mode, &inv_std, &mean, &var);
  if (bn_mode == BnMode::Train) {
    // Running variance uses the unbiased estimate, as the reference framework does.
    const double n = static_cast<double>(input.rows());
    running_mean = (1.0 - momentum) * running_mean + momentum * mean;
    running_var = (1.0 - momentum) * running_var + momentum * (var * (n / (n - 1.0)));
  }
  Matrix out = xhat.array().rowwise() * gamma.row(0).array();
  out.rowwise() += beta.row(0);
  cache_ = Cache{bn_mode, std::move(xhat), std::move(inv_std)};
  return out;
}

Matrix BatchNormLayer::backward(const Matrix& grad_out) {
  if (!cache_) throw StateError("batchnorm backward called before forward");
  const Matrix& xhat = cache_->xhat;
  require_same_shape(grad_out, xhat, "batchnorm grad_out");
  grad_gamma += grad_out.cwiseProduct(xhat).colwise().sum();
  grad_beta += grad_out.colwise().sum();

  Matrix dxhat = grad_out.array().rowwise() * gamma.row(0).array();
  if (cache_->mode != BnMode::Train) {
    return dxhat.array().rowwise() * cache_->inv_std.row(0).array();
  }
  const double n = static_cast<double>(xhat.rows());
  const Matrix sum_dxhat = dxhat.colwise().sum();
  const Matrix sum_dxhat_xhat = dxhat.cwiseProduct(xhat).colwise().sum();
  Matrix dx = (n * dxhat).rowwise() - sum_dxhat.row(0);
  dx -= (xhat.array().rowwise() * sum_dxhat_xhat.row(0).array()).matrix();
  dx = dx.array().rowwise() * (cache_->inv_std.row(0).array() / n);
  return dx;
}

void BatchNormLayer::zero_grad() {
  grad_gamma.setZero(1, gamma.cols());
  grad_beta.setZero(1, beta.cols());
}

void BatchNormLayer::collect_params(std::vector<ParamRef>& out) {
  out.push_back({&gamma, &grad_gamma});
  out.push_back({&beta, &grad_beta});
}

// ---------------------------------------------------------------- ReLU

Matrix ReluLayer::infer(const Matrix& input) const {
  if (features_ != 0) require_cols(input, static_cast<Eigen::Index>(features_), "relu input");
  return input.cwiseMax(0.0);
}

Matrix ReluLayer::forward(const Matrix& input) {
  Matrix out = infer(input);
  cached_input_ = input;
  return out;
}

Matrix ReluLayer::backward(const Matrix& grad_out) {
  if (!cached_input_) throw StateError("relu backward called before forward");
  require_same_shape(grad_out, *cached_input_, "relu grad_out");
  return (cached_input_->array() > 0.0).select(grad_out, 0.0);
}

std::string layer_name(const Layer& layer) {
  struct Visitor {
    std::string operator()(const AffineLayer& l) const {
      return "Affine(" + std::to_string(l.in()) + "->" + std::to_string(l.out()) + ")";
    }
    std::string operator()(const BatchNormLayer& l) const {
      return "BatchNorm(" + std::to_string(l.features()) + ")";
    }
    std::string operator()(const ReluLayer&) const { return "ReLU"; }
  };
  return std::visit(Visitor{}, layer);
}

}  // namespace fct
