#include "fct/synthdata/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fct/error.hpp"
#include "fct/rng.hpp"

namespace fct {

Matrix SyntheticDomain::lattice_point(int color, int shape) const {
  Matrix p = w_color.col(color).transpose() + w_shape.col(shape).transpose();
  return p;
}

SyntheticDomain make_domain(std::uint64_t seed, std::size_t colors, std::size_t shapes,
                            std::size_t dim, double sigma) {
  if (colors == 0 || shapes == 0 || colors * shapes < 2) {
    throw ConfigError("domain needs colors * shapes >= 2");
  }
  if (dim < colors + shapes) {
    throw ConfigError("domain dim " + std::to_string(dim) + " < colors + shapes = " +
                      std::to_string(colors + shapes));
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("domain sigma must be >= 0");

  Rng rng(seed);
  const auto k = static_cast<Eigen::Index>(colors + shapes);
  Eigen::MatrixXd gauss(static_cast<Eigen::Index>(dim), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < gauss.rows(); ++i) gauss(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(gauss.rows(), k);

  SyntheticDomain d;
  d.colors = colors;
  d.shapes = shapes;
  d.dim = dim;
  d.sigma = sigma;
  d.seed = seed;
  d.w_color = q.leftCols(static_cast<Eigen::Index>(colors));
  d.w_shape = q.rightCols(static_cast<Eigen::Index>(shapes));
  return d;
}

namespace {

void check_subsets(const SyntheticDomain& domain, std::span<const int> colors, std::span<const int> shapes) {
  if (colors.empty() || shapes.empty()) throw ConfigError("sample subsets must be non-empty");
  for (int c : colors) {
    if (c < 0 || static_cast<std::size_t>(c) >= domain.colors) throw ConfigError("color out of range");
  }
  for (int s : shapes) {
    if (s < 0 || static_cast<std::size_t>(s) >= domain.shapes) throw ConfigError("shape out of range");
  }
}

LabeledSet empty_set(const SyntheticDomain& domain, std::size_t n, LabelMode mode) {
  LabeledSet set;
  set.inputs = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(domain.dim));
  set.label_mode = mode;
  set.num_colors = domain.colors;
  set.num_shapes = domain.shapes;
  set.colors.reserve(n);
  set.shapes.reserve(n);
  set.joint.reserve(n);
  return set;
}

void emit(const SyntheticDomain& domain, LabeledSet& set, int c, int s, Rng& rng) {
  const auto row = static_cast<Eigen::Index>(set.joint.size());
  set.inputs.row(row) = domain.lattice_point(c, s);
  for (Eigen::Index j = 0; j < set.inputs.cols(); ++j) set.inputs(row, j) += domain.sigma * rng.normal();
  set.colors.push_back(c);
  set.shapes.push_back(s);
  set.joint.push_back(domain.joint_label(c, s));
}

}  // namespace

LabeledSet sample_set(const SyntheticDomain& domain, std::size_t n, std::span<const int> color_subset,
                      std::span<const int> shape_subset, LabelMode label_mode, std::uint64_t seed) {
  check_subsets(domain, color_subset, shape_subset);
  Rng rng(seed);
  LabeledSet set = empty_set(domain, n, label_mode);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = color_subset[rng.below(color_subset.size())];
    const int s = shape_subset[rng.below(shape_subset.size())];
    emit(domain, set, c, s, rng);
  }
  return set;
}

LabeledSet sample_per_cell(const SyntheticDomain& domain, std::size_t per_cell,
                           std::span<const int> color_subset, std::span<const int> shape_subset,
                           LabelMode label_mode, std::uint64_t seed) {
  check_subsets(domain, color_subset, shape_subset);
  Rng rng(seed);
  LabeledSet set = empty_set(domain, per_cell * color_subset.size() * shape_subset.size(), label_mode);
  for (int c : color_subset) {
    for (int s : shape_subset) {
      for (std::size_t i = 0; i < per_cell; ++i) emit(domain, set, c, s, rng);
    }
  }
  return set;
}

std::vector<int> iota_subset(std::size_t n) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

std::vector<double> joint_posterior(const SyntheticDomain& domain, std::span<const double> x) {
  if (x.size() != domain.dim) throw ShapeError("joint_posterior: input dim mismatch");
  const Eigen::Map<const Eigen::RowVectorXd> row(x.data(), static_cast<Eigen::Index>(x.size()));
  const std::size_t k = domain.joint_classes();
  std::vector<double> sq(k);
  for (std::size_t c = 0; c < domain.colors; ++c) {
    for (std::size_t s = 0; s < domain.shapes; ++s) {
      const auto j = static_cast<std::size_t>(domain.joint_label(static_cast<int>(c), static_cast<int>(s)));
      sq[j] = (row - domain.lattice_point(static_cast<int>(c), static_cast<int>(s))).squaredNorm();
    }
  }
  std::vector<double> post(k, 0.0);
  if (domain.sigma == 0.0) {
    post[static_cast<std::size_t>(std::min_element(sq.begin(), sq.end()) - sq.begin())] = 1.0;
    return post;
  }
  const double min_sq = *std::min_element(sq.begin(), sq.end());
  const double scale = 1.0 / (2.0 * domain.sigma * domain.sigma);
  double total = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    post[j] = std::exp(-(sq[j] - min_sq) * scale);
    total += post[j];
  }
  for (double& p : post) p /= total;
  return post;
}

std::vector<std::uint64_t> bayes_retrieval_oracle(const SyntheticDomain& domain,
                                                  std::span<const double> query,
                                                  const Matrix& gallery_inputs,
                                                  std::span<const std::uint64_t> gallery_ids) {
  if (static_cast<std::size_t>(gallery_inputs.rows()) != gallery_ids.size()) {
    throw ShapeError("bayes_retrieval_oracle: ids/rows mismatch");
  }
  const std::vector<double> pq = joint_posterior(domain, query);
  std::vector<std::pair<double, std::uint64_t>> scored;
  scored.reserve(gallery_ids.size());
  for (std::size_t i = 0; i < gallery_ids.size(); ++i) {
    const Eigen::RowVectorXd row = gallery_inputs.row(static_cast<Eigen::Index>(i));
    const std::vector<double> pg =
        joint_posterior(domain, std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
    double agreement = 0.0;
    for (std::size_t k = 0; k < pq.size(); ++k) agreement += pq[k] * pg[k];
    scored.emplace_back(agreement, gallery_ids[i]);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::uint64_t> ranked;
  ranked.reserve(scored.size());
  for (const auto& [score, id] : scored) ranked.push_back(id);
  return ranked;
}

}  // namespace fct
