#include "fct/training/side_info.hpp"

#include <cmath>

#include "fct/error.hpp"
#include "fct/models/autoencoder.hpp"
#include "fct/models/embedder.hpp"
#include "fct/numerics/loss.hpp"
#include "fct/numerics/ops.hpp"
#include "fct/training/trainers.hpp"

namespace fct {

std::string to_string(SideInfoKind kind) {
  switch (kind) {
    case SideInfoKind::Zero: return "zero";
    case SideInfoKind::Autoencoder: return "autoencoder";
    case SideInfoKind::AlternateModel: return "alternate_model";
    case SideInfoKind::MixupModel: return "mixup_model";
    case SideInfoKind::Contrastive: return "contrastive";
  }
  return "zero";
}

SideInfoKind parse_side_info_kind(const std::string& name) {
  if (name == "zero") return SideInfoKind::Zero;
  if (name == "autoencoder") return SideInfoKind::Autoencoder;
  if (name == "alternate_model") return SideInfoKind::AlternateModel;
  if (name == "mixup_model") return SideInfoKind::MixupModel;
  if (name == "contrastive") return SideInfoKind::Contrastive;
  throw ConfigError("unknown side-information kind '" + name +
                    "' (expected zero, autoencoder, alternate_model, mixup_model, contrastive)");
}

void SideInfoSpec::validate() const {
  if (kind != SideInfoKind::Zero && hidden == 0 && depth > 0) throw ConfigError("side-info hidden width must be >= 1");
  if (kind == SideInfoKind::MixupModel && !(mixup_alpha > 0.0)) throw ConfigError("mixup alpha must be positive");
  if (kind == SideInfoKind::Contrastive) {
    if (!(temperature > 0.0)) throw ConfigError("contrastive temperature must be positive");
    if (!(augment_noise_std >= 0.0)) throw ConfigError("contrastive augmentation noise must be >= 0");
  }
}

Matrix SideInfoModel::infer(const Matrix& inputs) const {
  require_cols(inputs, static_cast<Eigen::Index>(input_dim), "side-information input");
  if (kind == SideInfoKind::Zero) return Matrix::Zero(inputs.rows(), static_cast<Eigen::Index>(dim));
  return net.infer(inputs, Mode::Eval);
}

SideInfoModel zero_side_info(std::size_t input_dim, std::size_t d_side) {
  if (d_side == 0) throw ConfigError("side-information dim must be >= 1");
  SideInfoModel m;
  m.kind = SideInfoKind::Zero;
  m.input_dim = input_dim;
  m.dim = d_side;
  return m;
}

InfoNceResult info_nce_loss(const Matrix& a, const Matrix& b, double temperature) {
  require_same_shape(a, b, "info_nce_loss");
  const Eigen::Index n = a.rows();
  if (n < 2) throw DegenerateInputError("info_nce_loss needs at least 2 pairs");
  const Matrix ua = normalize_rows(a);
  const Matrix ub = normalize_rows(b);
  const Matrix logits = (ua * ub.transpose()) / temperature;  // row i: anchor a_i against all b

  std::vector<int> diag(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) diag[static_cast<std::size_t>(i)] = static_cast<int>(i);
  const LossResult ab = cross_entropy_loss(logits, diag);
  const LossResult ba = cross_entropy_loss(logits.transpose(), diag);

  // d/dlogits of 0.5 * (ab + ba)
  const Matrix dlogits = 0.5 * (ab.grad + ba.grad.transpose());
  const Matrix dua = dlogits * ub / temperature;
  const Matrix dub = dlogits.transpose() * ua / temperature;

  InfoNceResult out;
  out.value = 0.5 * (ab.value + ba.value);
  out.grad_a = normalize_rows_backward(a, dua);
  out.grad_b = normalize_rows_backward(b, dub);
  return out;
}

namespace {

TrainHistory train_contrastive(Sequential& encoder, const Matrix& inputs, const SideInfoSpec& spec,
                               const TrainConfig& cfg) {
  cfg.validate();
  TrainHistory history;
  if (cfg.epochs == 0) return history;
  const auto n = static_cast<std::size_t>(inputs.rows());
  if (n < 2) throw DegenerateInputError("contrastive training needs at least 2 samples");
  Rng rng(cfg.seed);
  AdamState adam(cfg.adam);
  std::vector<ParamRef> params;
  encoder.collect_params(params);
  const LrSchedule sched = cfg.schedule();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.bn_freeze_epoch && epoch == *cfg.bn_freeze_epoch) encoder.freeze_bn_stats();
    adam.set_lr(lr_at_epoch(sched, epoch));
    const auto batches = epoch_batches(n, cfg.batch_size, rng);
    double total = 0.0;
    for (const auto& batch : batches) {
      const Matrix x = gather_rows(inputs, batch);
      const auto b = x.rows();
      Matrix views(2 * b, x.cols());
      for (Eigen::Index i = 0; i < 2 * b; ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
          views(i, j) = x(i % b, j) + spec.augment_noise_std * rng.normal();
        }
      }
      encoder.zero_grad();
      const Matrix z = encoder.forward(views, Mode::Train);
      const InfoNceResult loss = info_nce_loss(z.topRows(b), z.bottomRows(b), spec.temperature);
      Matrix grad(2 * b, z.cols());
      grad << loss.grad_a, loss.grad_b;
      encoder.backward(grad);
      adam.step(params);
      total += loss.value;
    }
    history.epoch_loss.push_back(batches.empty() ? 0.0 : total / static_cast<double>(batches.size()));
    if (cfg.on_epoch_end) cfg.on_epoch_end(epoch);
  }
  return history;
}

}  // namespace

SideInfoModel train_side_info(const SideInfoSpec& spec, const LabeledSet& data, std::size_t d_side,
                              const TrainConfig& cfg, TrainHistory* history) {
  spec.validate();
  cfg.validate();
  const auto input_dim = static_cast<std::size_t>(data.inputs.cols());
  SideInfoModel model = zero_side_info(input_dim, d_side);
  model.kind = spec.kind;
  TrainHistory h;
  switch (spec.kind) {
    case SideInfoKind::Zero:
      break;
    case SideInfoKind::Autoencoder: {
      DenseAutoencoder ae = build_autoencoder(input_dim, spec.hidden, spec.depth, d_side, derive_seed(cfg.seed, "init"));
      h = train_autoencoder(ae, data.inputs, cfg);
      model.net = std::move(ae.encoder);
      break;
    }
    case SideInfoKind::AlternateModel:
    case SideInfoKind::MixupModel: {
      EmbedderNet net = build_embedder(input_dim, spec.hidden, spec.depth, d_side, data.num_classes(),
                                       derive_seed(cfg.seed, "init"));
      h = spec.kind == SideInfoKind::AlternateModel ? train_embedder(net, data, cfg)
                                                    : train_embedder_mixup(net, data, cfg, spec.mixup_alpha);
      model.net = std::move(net.backbone);
      break;
    }
    case SideInfoKind::Contrastive: {
      Rng rng(derive_seed(cfg.seed, "init"));
      std::vector<std::size_t> widths{input_dim};
      for (std::size_t i = 0; i < spec.depth; ++i) widths.push_back(spec.hidden);
      widths.push_back(d_side);
      model.net = make_mlp(widths, true, true, rng);
      h = train_contrastive(model.net, data.inputs, spec, cfg);
      break;
    }
  }
  if (history) *history = std::move(h);
  return model;
}

}  // namespace fct
