#pragma once

// Reference implementations used only by the tests. Everything here is
// written from the textbook definitions with plain loops, independently of
// the library code paths they check.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fct/models/sequential.hpp"
#include "fct/models/transformation.hpp"
#include "fct/numerics/matrix.hpp"
#include "fct/retrieval/gallery.hpp"
#include "fct/rng.hpp"

namespace fct::testing {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0);

// One layer applied the slow way. BatchNorm uses batch statistics in Train
// mode and running statistics otherwise.
Matrix ref_apply(const Layer& layer, const Matrix& x, Mode mode);
Matrix ref_forward(const std::vector<Layer>& layers, std::size_t from, const Matrix& x, Mode mode);
Matrix ref_transformation_forward(const TransformationNet& net, const Matrix& old_emb, const Matrix& side,
                                  Mode mode);

double ref_mse(const Matrix& pred, const Matrix& target);
// Mean over rows of KL(p || q) (or KL(q || p) when reversed) with
// p = softmax(target * W + b), q = softmax(pred * W + b).
double ref_kl(const Matrix& pred, const Matrix& target, const AffineLayer& head, bool reversed);

using OutputLoss = std::function<double(const Matrix&)>;

// ref_kl against a fixed target, with the target distribution computed once.
OutputLoss ref_kl_to(const Matrix& target, const AffineLayer& head, bool reversed);

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  // Coordinates left out because a ReLU input changed sign between x + h
  // and x - h; central differences are meaningless across the kink.
  std::size_t skipped_kinks = 0;
};

// Central differences over every parameter of `net` (and over both inputs)
// compared with the gradients currently accumulated in the net and in
// grad_old / grad_side, in Train mode. Fast enough for full-width nets on
// small batches.
GradCheck check_transformation_gradients(const TransformationNet& net, const Matrix& old_emb, const Matrix& side,
                                         const Matrix& grad_old, const Matrix& grad_side, const OutputLoss& loss,
                                         double h = 1e-5, double floor = 1e-6);

// Several losses on the same inputs and parameter values in one sweep: the
// perturbed forward passes are shared and only the loss differs. Each case's
// net holds the analytic parameter gradients of its loss.
struct GradientCase {
  const TransformationNet* net;
  Matrix grad_old;
  Matrix grad_side;
  OutputLoss loss;
};
std::vector<GradCheck> check_transformation_gradients(const std::vector<GradientCase>& cases, const Matrix& old_emb,
                                                      const Matrix& side, double h = 1e-5, double floor = 1e-6);

// Same check for a plain chain; grad_input may be empty to skip the input.
GradCheck check_sequential_gradients(Sequential& net, const Matrix& input, const Matrix& grad_input, Mode mode,
                                     const OutputLoss& loss, double h = 1e-5, double floor = 1e-6);

// Gallery rows sorted by (squared distance, id) with std::sort over all pairs.
std::vector<std::uint64_t> brute_force_rank(std::span<const double> query, const Matrix& gallery,
                                            std::span<const std::uint64_t> ids,
                                            std::optional<std::uint64_t> exclude = std::nullopt);

// (1/R) sum_{k : rel_k} precision@k, counted directly.
double ref_average_precision(const std::vector<bool>& relevant);

// HSIC form: tr(K H L H) / sqrt(tr(K H K H) tr(L H L H)), K = X X', L = Y Y'.
double ref_cka(const Matrix& x, const Matrix& y);

// One random retrieval instance (<= 64 gallery records, <= 16 queries, some
// query ids shared with the gallery, integer-valued embeddings on every other
// instance so that distance ties occur) checked against the oracles above.
struct MetricInstanceCheck {
  bool rankings_equal = true;
  double max_cmc_error = 0.0;
  double max_ap_error = 0.0;
  double cka_error = 0.0;
};
MetricInstanceCheck check_metric_instance(Rng& rng, bool integer_values);

// Random orthogonal matrix from the QR factorization of a Gaussian matrix.
Matrix random_orthogonal(std::size_t n, Rng& rng);

}  // namespace fct::testing
