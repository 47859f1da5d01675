#include "fct/training/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fct/error.hpp"
#include "fct/numerics/loss.hpp"
#include "fct/numerics/ops.hpp"

namespace fct {

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::Mse: return "mse";
    case LossKind::Kl: return "kl";
    case LossKind::KlReversed: return "kl_reversed";
  }
  return "mse";
}

LossKind parse_loss_kind(const std::string& name) {
  if (name == "mse") return LossKind::Mse;
  if (name == "kl") return LossKind::Kl;
  if (name == "kl_reversed") return LossKind::KlReversed;
  throw ConfigError("unknown loss kind '" + name + "' (expected mse, kl, kl_reversed)");
}

void TrainConfig::validate() const {
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (epochs > 0) schedule().validate();
  if (bn_freeze_epoch && *bn_freeze_epoch >= epochs && epochs > 0) {
    throw ConfigError("bn_freeze_epoch must be < epochs");
  }
  if (!(adam.weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);
  const std::size_t b = std::min(batch_size, n);
  std::vector<std::vector<std::size_t>> batches;
  if (b == 0) return batches;
  for (std::size_t start = 0; start + b <= n; start += b) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(start + b));
  }
  return batches;
}

namespace {

// Shared epoch driver. `step` runs forward/backward for one batch, leaves
// gradients in the parameters and returns the batch loss.
template <typename Net, typename StepFn>
TrainHistory run_epochs(Net& net, std::size_t n, const TrainConfig& cfg, StepFn&& step) {
  cfg.validate();
  TrainHistory history;
  if (cfg.epochs == 0) return history;
  if (n < 2) throw DegenerateInputError("training needs at least 2 samples");
  Rng rng(cfg.seed);
  AdamState adam(cfg.adam);
  std::vector<ParamRef> params;
  net.collect_params(params);
  const LrSchedule sched = cfg.schedule();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.bn_freeze_epoch && epoch == *cfg.bn_freeze_epoch) net.freeze_bn_stats();
    adam.set_lr(lr_at_epoch(sched, epoch));
    const auto batches = epoch_batches(n, cfg.batch_size, rng);
    double total = 0.0;
    for (const auto& batch : batches) {
      net.zero_grad();
      total += step(batch, rng);
      adam.step(params);
    }
    history.epoch_loss.push_back(batches.empty() ? 0.0 : total / static_cast<double>(batches.size()));
    if (cfg.on_epoch_end) cfg.on_epoch_end(epoch);
  }
  return history;
}

std::vector<int> gather_labels(const std::vector<int>& labels, const std::vector<std::size_t>& idx) {
  std::vector<int> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = labels[idx[i]];
  return out;
}

void check_labels(const EmbedderNet& net, const LabeledSet& data) {
  require_cols(data.inputs, static_cast<Eigen::Index>(net.input_dim()), "embedder training inputs");
  if (data.num_classes() != net.num_classes()) {
    throw ConfigError("label mode has " + std::to_string(data.num_classes()) + " classes but head has " +
                      std::to_string(net.num_classes()));
  }
  for (int y : data.labels()) {
    if (y < 0 || static_cast<std::size_t>(y) >= net.num_classes()) {
      throw ConfigError("label " + std::to_string(y) + " out of range");
    }
  }
}

// Adapter so run_epochs can freeze BN on embedders too.
struct EmbedderTrainView {
  EmbedderNet& net;
  void collect_params(std::vector<ParamRef>& out) { net.collect_params(out); }
  void zero_grad() { net.zero_grad(); }
  void freeze_bn_stats() { net.backbone.freeze_bn_stats(); }
};

struct AutoencoderTrainView {
  DenseAutoencoder& ae;
  void collect_params(std::vector<ParamRef>& out) { ae.collect_params(out); }
  void zero_grad() { ae.zero_grad(); }
  void freeze_bn_stats() {}
};

}  // namespace

TrainHistory train_embedder(EmbedderNet& net, const LabeledSet& data, const TrainConfig& cfg) {
  check_labels(net, data);
  EmbedderTrainView view{net};
  const auto& labels = data.labels();
  return run_epochs(view, data.size(), cfg, [&](const std::vector<std::size_t>& batch, Rng&) {
    const Matrix x = gather_rows(data.inputs, batch);
    const std::vector<int> y = gather_labels(labels, batch);
    const Matrix logits = net.forward_logits(x, Mode::Train);
    LossResult loss = cross_entropy_loss(logits, y);
    net.backward_logits(loss.grad);
    return loss.value;
  });
}

TrainHistory train_embedder_mixup(EmbedderNet& net, const LabeledSet& data, const TrainConfig& cfg,
                                  double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("mixup alpha must be positive");
  check_labels(net, data);
  EmbedderTrainView view{net};
  const auto& labels = data.labels();
  return run_epochs(view, data.size(), cfg, [&](const std::vector<std::size_t>& batch, Rng& rng) {
    std::vector<std::size_t> partner = batch;
    rng.shuffle(partner);
    const double lambda = rng.beta(alpha, alpha);
    const Matrix x = lambda * gather_rows(data.inputs, batch) + (1.0 - lambda) * gather_rows(data.inputs, partner);
    const std::vector<int> y = gather_labels(labels, batch);
    const Matrix logits = net.forward_logits(x, Mode::Train);
    LossResult loss = cross_entropy_loss(logits, y);
    net.backward_logits(loss.grad);
    return loss.value;
  });
}

TrainHistory train_autoencoder(DenseAutoencoder& ae, const Matrix& inputs, const TrainConfig& cfg) {
  require_cols(inputs, static_cast<Eigen::Index>(ae.input_dim()), "autoencoder training inputs");
  AutoencoderTrainView view{ae};
  return run_epochs(view, static_cast<std::size_t>(inputs.rows()), cfg,
                    [&](const std::vector<std::size_t>& batch, Rng&) {
                      const Matrix x = gather_rows(inputs, batch);
                      const Matrix recon = ae.forward(x);
                      LossResult loss = mse_loss(recon, x);
                      ae.backward(loss.grad);
                      return loss.value;
                    });
}

namespace {

LossResult transformation_loss(const Matrix& pred, const Matrix& target, LossKind kind, const AffineLayer* head) {
  switch (kind) {
    case LossKind::Mse: return mse_loss(pred, target);
    case LossKind::Kl: return kl_distillation_loss(pred, target, *head, false);
    case LossKind::KlReversed: return kl_distillation_loss(pred, target, *head, true);
  }
  return mse_loss(pred, target);
}

}  // namespace

TrainHistory train_transformation(TransformationNet& h, const Matrix& old_emb, const Matrix& side,
                                  const Matrix& target, const TrainConfig& cfg, const AffineLayer* head) {
  const auto& d = h.dims();
  require_cols(old_emb, static_cast<Eigen::Index>(d.d_old), "transformation training old embeddings");
  require_cols(side, static_cast<Eigen::Index>(d.d_side), "transformation training side-information");
  require_cols(target, static_cast<Eigen::Index>(d.d_new), "transformation training targets");
  if (old_emb.rows() != side.rows() || old_emb.rows() != target.rows()) {
    throw ShapeError("transformation training: row counts differ");
  }
  if (cfg.loss != LossKind::Mse) {
    if (head == nullptr) throw ConfigError("KL transformation losses need the new model's classifier head");
    if (head->in() != d.d_new) throw ShapeError("classifier head input does not match d_new");
  }
  const Matrix goal = h.normalize_output() ? normalize_rows(target) : target;
  return run_epochs(h, static_cast<std::size_t>(old_emb.rows()), cfg,
                    [&](const std::vector<std::size_t>& batch, Rng&) {
                      const Matrix pred = h.forward(gather_rows(old_emb, batch), gather_rows(side, batch), Mode::Train);
                      LossResult loss = transformation_loss(pred, gather_rows(goal, batch), cfg.loss, head);
                      h.backward(loss.grad);
                      return loss.value;
                    });
}

TrainHistory train_transformation(TransformationNet& h, const EmbedderNet& old_model,
                                  const SideInfoModel& side_model, const EmbedderNet& new_model,
                                  const LabeledSet& data, const TrainConfig& cfg) {
  const Matrix old_emb = old_model.embed(data.inputs, Mode::Eval);
  const Matrix side = side_model.infer(data.inputs);
  const Matrix target = new_model.embed(data.inputs, Mode::Eval);
  return train_transformation(h, old_emb, side, target, cfg, &new_model.head);
}

SequenceStepHistory train_sequence_step(TransformationNet& h, TransformationNet& g, const Matrix& emb_prev,
                                        const Matrix& side_prev, const Matrix& emb_next,
                                        const Matrix& side_next, const TrainConfig& cfg) {
  const auto& hd = h.dims();
  const auto& gd = g.dims();
  if (hd.d_old != gd.d_old || hd.d_side != gd.d_side) {
    throw ShapeError("sequence step: h and g must read the same (embedding, side-information) pair");
  }
  if (static_cast<std::size_t>(emb_next.cols()) != hd.d_new || static_cast<std::size_t>(side_next.cols()) != gd.d_new) {
    throw ShapeError("sequence step: dimension chain mismatch");
  }
  TrainConfig mse_cfg = cfg;
  mse_cfg.loss = LossKind::Mse;
  SequenceStepHistory out;
  out.h = train_transformation(h, emb_prev, side_prev, emb_next, mse_cfg);
  mse_cfg.seed = derive_seed(cfg.seed, "sequence-g");
  out.g = train_transformation(g, emb_prev, side_prev, side_next, mse_cfg);
  return out;
}

double transformation_mse(const TransformationNet& h, const Matrix& old_emb, const Matrix& side,
                          const Matrix& target) {
  const Matrix pred = h.infer(old_emb, side, Mode::Eval);
  const Matrix goal = h.normalize_output() ? normalize_rows(target) : target;
  return mse_loss(pred, goal).value;
}

}  // namespace fct
