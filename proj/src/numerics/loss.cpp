#include "fct/numerics/loss.hpp"

#include <cmath>
#include <string>

#include "fct/error.hpp"

namespace fct {

LossResult mse_loss(const Matrix& pred, const Matrix& target) {
  require_same_shape(pred, target, "mse_loss");
  const double count = static_cast<double>(pred.size());
  if (count == 0) return {0.0, Matrix::Zero(pred.rows(), pred.cols())};
  Matrix diff = pred - target;
  LossResult r;
  r.value = diff.squaredNorm() / count;
  r.grad = (2.0 / count) * diff;
  return r;
}

Matrix log_softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    out.row(i) = logits.row(i).array() - lse;
  }
  return out;
}

LossResult kl_distillation_loss(const Matrix& pred_emb, const Matrix& target_emb,
                                const AffineLayer& frozen_head, bool reversed) {
  require_same_shape(pred_emb, target_emb, "kl_distillation_loss");
  require_cols(pred_emb, frozen_head.weight.rows(), "kl_distillation_loss head input");
  const Eigen::Index batch = pred_emb.rows();
  if (batch == 0) return {0.0, Matrix::Zero(0, pred_emb.cols())};

  const Matrix log_p = log_softmax_rows(frozen_head.infer(target_emb));
  const Matrix log_q = log_softmax_rows(frozen_head.infer(pred_emb));
  const Matrix p = log_p.array().exp().matrix();
  const Matrix q = log_q.array().exp().matrix();
  const double inv_b = 1.0 / static_cast<double>(batch);

  Matrix grad_logits(batch, log_q.cols());
  double total = 0.0;
  if (!reversed) {
    // KL(p || q); d/dz_q = q - p.
    total = (p.array() * (log_p - log_q).array()).sum();
    grad_logits = (q - p) * inv_b;
  } else {
    // KL(q || p); d/dz_q_j = q_j (r_j - sum_k q_k r_k) with r = log q - log p.
    const Matrix r = log_q - log_p;
    total = (q.array() * r.array()).sum();
    for (Eigen::Index i = 0; i < batch; ++i) {
      const double expected = q.row(i).dot(r.row(i));
      grad_logits.row(i) = q.row(i).array() * (r.row(i).array() - expected) * inv_b;
    }
  }
  LossResult out;
  out.value = total * inv_b;
  out.grad = grad_logits * frozen_head.weight.transpose();
  return out;
}

LossResult cross_entropy_loss(const Matrix& logits, std::span<const int> labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size()) {
    throw ShapeError("cross_entropy_loss: " + std::to_string(labels.size()) + " labels for " +
                     shape_str(logits) + " logits");
  }
  const Eigen::Index batch = logits.rows();
  if (batch == 0) return {0.0, Matrix::Zero(0, logits.cols())};
  const Matrix log_probs = log_softmax_rows(logits);
  Matrix grad = log_probs.array().exp().matrix();
  const double inv_b = 1.0 / static_cast<double>(batch);
  double total = 0.0;
  for (Eigen::Index i = 0; i < batch; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= logits.cols()) {
      throw ShapeError("cross_entropy_loss: label " + std::to_string(y) + " out of range for " +
                       std::to_string(logits.cols()) + " classes");
    }
    total -= log_probs(i, y);
    grad(i, y) -= 1.0;
  }
  return {total * inv_b, grad * inv_b};
}

LossResult soft_cross_entropy_loss(const Matrix& logits, const Matrix& target_probs) {
  require_same_shape(logits, target_probs, "soft_cross_entropy_loss");
  const Eigen::Index batch = logits.rows();
  if (batch == 0) return {0.0, Matrix::Zero(0, logits.cols())};
  const Matrix log_probs = log_softmax_rows(logits);
  const double inv_b = 1.0 / static_cast<double>(batch);
  LossResult out;
  out.value = -(target_probs.array() * log_probs.array()).sum() * inv_b;
  // Rows of target_probs sum to one, so the gradient is softmax - target.
  out.grad = (log_probs.array().exp().matrix() - target_probs) * inv_b;
  return out;
}

}  // namespace fct
