#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fct/numerics/matrix.hpp"

namespace fct {

// ColorShape toy world: x = W_color e_c + W_shape e_s + sigma * noise.
// The C + S factor columns are orthonormal, so both factors are recoverable
// from a clean input, but a model trained on colors alone is free to discard
// the shape directions.
struct SyntheticDomain {
  std::size_t colors = 4;
  std::size_t shapes = 4;
  std::size_t dim = 32;
  Matrix w_color;  // dim x colors
  Matrix w_shape;  // dim x shapes
  double sigma = 0.5;
  std::uint64_t seed = 0;

  std::size_t joint_classes() const { return colors * shapes; }
  int joint_label(int color, int shape) const { return color * static_cast<int>(shapes) + shape; }
  // W_color e_c + W_shape e_s as a row.
  Matrix lattice_point(int color, int shape) const;
};

SyntheticDomain make_domain(std::uint64_t seed, std::size_t colors, std::size_t shapes,
                            std::size_t dim, double sigma);

enum class LabelMode { Color, Joint };

struct LabeledSet {
  Matrix inputs;  // n x dim
  std::vector<int> colors;
  std::vector<int> shapes;
  std::vector<int> joint;  // color * S + shape
  LabelMode label_mode = LabelMode::Joint;
  std::size_t num_colors = 0;
  std::size_t num_shapes = 0;

  std::size_t size() const { return joint.size(); }
  const std::vector<int>& labels() const { return label_mode == LabelMode::Color ? colors : joint; }
  std::size_t num_classes() const {
    return label_mode == LabelMode::Color ? num_colors : num_colors * num_shapes;
  }
};

// n samples, each with (color, shape) drawn uniformly from the subsets.
LabeledSet sample_set(const SyntheticDomain& domain, std::size_t n, std::span<const int> color_subset,
                      std::span<const int> shape_subset, LabelMode label_mode, std::uint64_t seed);

// Exactly `per_cell` samples for every (color, shape) in the subsets, cell-major.
LabeledSet sample_per_cell(const SyntheticDomain& domain, std::size_t per_cell,
                           std::span<const int> color_subset, std::span<const int> shape_subset,
                           LabelMode label_mode, std::uint64_t seed);

std::vector<int> iota_subset(std::size_t n);

// Posterior over joint classes under the true generative model (uniform prior).
// With sigma = 0 the posterior is one-hot on the nearest lattice point.
std::vector<double> joint_posterior(const SyntheticDomain& domain, std::span<const double> x);

// Ranks gallery rows by descending posterior agreement sum_k p_q(k) p_g(k)
// with the query, ties by ascending id. Returns gallery ids.
std::vector<std::uint64_t> bayes_retrieval_oracle(const SyntheticDomain& domain,
                                                  std::span<const double> query,
                                                  const Matrix& gallery_inputs,
                                                  std::span<const std::uint64_t> gallery_ids);

}  // namespace fct
