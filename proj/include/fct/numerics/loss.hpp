#pragma once

#include <span>

#include "fct/numerics/layers.hpp"
#include "fct/numerics/matrix.hpp"

namespace fct {

struct LossResult {
  double value = 0.0;
  Matrix grad;  // dLoss / dpred, same shape as pred
};

// Mean over all elements of (pred - target)^2.
LossResult mse_loss(const Matrix& pred, const Matrix& target);

// Distillation through a frozen classifier head. p = softmax(head(target)),
// q = softmax(head(pred)); forward is mean_b KL(p || q), reversed is
// mean_b KL(q || p). The head receives no gradient.
LossResult kl_distillation_loss(const Matrix& pred_emb, const Matrix& target_emb,
                                const AffineLayer& frozen_head, bool reversed);

// Mean softmax cross-entropy of logits against integer labels.
LossResult cross_entropy_loss(const Matrix& logits, std::span<const int> labels);

// Mean cross-entropy against soft targets (rows sum to 1).
LossResult soft_cross_entropy_loss(const Matrix& logits, const Matrix& target_probs);

// Row-wise log-softmax, numerically stabilized.
Matrix log_softmax_rows(const Matrix& logits);

}  // namespace fct
