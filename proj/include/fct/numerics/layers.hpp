#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fct/numerics/matrix.hpp"
#include "fct/rng.hpp"

namespace fct {

// Phase requested by the caller of a network.
enum class Mode { Train, Eval };

// What a BatchNorm layer actually does for a given phase.
enum class BnMode { Train, Eval, FrozenStats };

// A learnable tensor and its gradient accumulator, as seen by the optimizer.
struct ParamRef {
  Matrix* value;
  Matrix* grad;
};

// y = x * weight + bias, weight is in x out.
class AffineLayer {
 public:
  AffineLayer() = default;
  AffineLayer(std::size_t in, std::size_t out);

  // Uniform in +-sqrt(1/in) for both weight and bias.
  static AffineLayer uniform_init(std::size_t in, std::size_t out, Rng& rng);

  Matrix forward(const Matrix& input);
  Matrix infer(const Matrix& input) const;
  // Returns dL/dinput and accumulates dL/dweight, dL/dbias.
  Matrix backward(const Matrix& grad_out);

  void zero_grad();
  void collect_params(std::vector<ParamRef>& out);

  std::size_t in() const { return static_cast<std::size_t>(weight.rows()); }
  std::size_t out() const { return static_cast<std::size_t>(weight.cols()); }
  std::size_t param_count() const { return in() * out() + out(); }
  std::size_t mac_count() const { return in() * out(); }

  Matrix weight;       // in x out
  Matrix bias;         // 1 x out
  Matrix grad_weight;  // in x out
  Matrix grad_bias;    // 1 x out

 private:
  std::optional<Matrix> cached_input_;
};

class BatchNormLayer {
 public:
  static constexpr double kDefaultMomentum = 0.1;
  static constexpr double kDefaultEps = 1e-5;

  BatchNormLayer() = default;
  explicit BatchNormLayer(std::size_t features, double momentum = kDefaultMomentum,
                          double eps = kDefaultEps);

  BnMode effective_mode(Mode mode) const;

  // Train: batch statistics (biased variance), running statistics updated.
  // Eval / FrozenStats: running statistics. gamma and beta apply in all modes.
  Matrix forward(const Matrix& input, Mode mode);
  // Same output as forward, without caching or touching running statistics.
  Matrix infer(const Matrix& input, Mode mode) const;
  Matrix backward(const Matrix& grad_out);

  // Running statistics stop updating; gamma and beta still train.
  void freeze_stats() { stats_frozen_ = true; }
  bool stats_frozen() const { return stats_frozen_; }

  void zero_grad();
  void collect_params(std::vector<ParamRef>& out);

  std::size_t features() const { return static_cast<std::size_t>(gamma.cols()); }
  std::size_t param_count() const { return 2 * features(); }

  Matrix gamma;          // 1 x n
  Matrix beta;           // 1 x n
  Matrix running_mean;   // 1 x n
  Matrix running_var;    // 1 x n
  Matrix grad_gamma;
  Matrix grad_beta;
  double momentum = kDefaultMomentum;
  double eps = kDefaultEps;

 private:
  struct Cache {
    BnMode mode;
    Matrix xhat;
    Matrix inv_std;  // 1 x n
  };
  Matrix normalize(const Matrix& input, BnMode mode, Matrix* inv_std_out,
                   Matrix* batch_mean, Matrix* batch_var) const;

  bool stats_frozen_ = false;
  std::optional<Cache> cache_;
};

class ReluLayer {
 public:
  ReluLayer() = default;
  explicit ReluLayer(std::size_t features) : features_(features) {}

  Matrix forward(const Matrix& input);
  Matrix infer(const Matrix& input) const;
  // Gradient is masked where the forward input was <= 0.
  Matrix backward(const Matrix& grad_out);

  std::size_t features() const { return features_; }

 private:
  std::size_t features_ = 0;
  std::optional<Matrix> cached_input_;
};

using Layer = std::variant<AffineLayer, BatchNormLayer, ReluLayer>;

std::string layer_name(const Layer& layer);

}  // namespace fct
