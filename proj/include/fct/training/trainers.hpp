#pragma once

#include <utility>

#include "fct/models/autoencoder.hpp"
#include "fct/models/embedder.hpp"
#include "fct/models/transformation.hpp"
#include "fct/synthdata/domain.hpp"
#include "fct/training/config.hpp"
#include "fct/training/side_info.hpp"

namespace fct {

// Softmax cross-entropy on the embedder's classifier head.
TrainHistory train_embedder(EmbedderNet& net, const LabeledSet& data, const TrainConfig& cfg);

// Same loop on mixed inputs lambda x_i + (1 - lambda) x_j with the hard label
// of x_i; lambda ~ Beta(alpha, alpha), one draw per batch.
TrainHistory train_embedder_mixup(EmbedderNet& net, const LabeledSet& data, const TrainConfig& cfg,
                                  double alpha);

// L2 reconstruction.
TrainHistory train_autoencoder(DenseAutoencoder& ae, const Matrix& inputs, const TrainConfig& cfg);

// Fits h(old_emb, side) to target with cfg.loss. KL losses need `head`, the
// new model's frozen classifier. When h normalizes its output the target rows
// are normalized too. BN statistics freeze at cfg.bn_freeze_epoch.
TrainHistory train_transformation(TransformationNet& h, const Matrix& old_emb, const Matrix& side,
                                  const Matrix& target, const TrainConfig& cfg,
                                  const AffineLayer* head = nullptr);

// Convenience form: features come from the frozen models on data.inputs.
TrainHistory train_transformation(TransformationNet& h, const EmbedderNet& old_model,
                                  const SideInfoModel& side_model, const EmbedderNet& new_model,
                                  const LabeledSet& data, const TrainConfig& cfg);

struct SequenceStepHistory {
  TrainHistory h;
  TrainHistory g;
};

// One hop of a model-update chain: h maps (emb_i, side_i) to emb_{i+1},
// g maps (emb_i, side_i) to side_{i+1}; both with MSE, trained independently.
SequenceStepHistory train_sequence_step(TransformationNet& h, TransformationNet& g, const Matrix& emb_prev,
                                        const Matrix& side_prev, const Matrix& emb_next,
                                        const Matrix& side_next, const TrainConfig& cfg);

// Mean squared error of h on a dataset in Eval mode (normalized target when h normalizes).
double transformation_mse(const TransformationNet& h, const Matrix& old_emb, const Matrix& side,
                          const Matrix& target);

}  // namespace fct
