#include <doctest.h>

#include <cmath>

#include "fct/error.hpp"
#include "fct/models/autoencoder.hpp"
#include "fct/models/embedder.hpp"
#include "fct/models/transformation.hpp"
#include "fct/numerics/loss.hpp"
#include "oracles.hpp"

using namespace fct;
using fct::testing::random_matrix;

namespace {

// Parameter count written out layer by layer: affine in*out + out, BN 2n.
std::size_t closed_form_params(std::size_t a, std::size_t b, std::size_t c, std::size_t mixer) {
  const std::size_t p = 256;
  const auto affine = [](std::size_t in, std::size_t out) { return in * out + out; };
  const auto bn = [](std::size_t n) { return 2 * n; };
  const std::size_t proj_a = affine(a, p) + bn(p) + affine(p, p) + bn(p);
  const std::size_t proj_b = affine(b, p) + bn(p) + affine(p, p) + bn(p);
  const std::size_t mix = affine(2 * p, mixer) + bn(mixer) + affine(mixer, mixer) + bn(mixer) + affine(mixer, c);
  return proj_a + proj_b + mix;
}

// A transformation small enough for a brute-force finite-difference check.
TransformationNet tiny_transformation(bool normalize, Rng& rng) {
  Sequential po = make_mlp({5, 6, 6}, true, false, rng);
  Sequential ps = make_mlp({3, 4, 4}, true, false, rng);
  Sequential mx = make_mlp({10, 7, 7, 4}, true, true, rng);
  return TransformationNet({5, 3, 4}, 1.0, normalize, std::move(po), std::move(ps), std::move(mx));
}

// Every parameter perturbed in place and the whole reference forward rerun.
double naive_max_error(TransformationNet& net, const Matrix& x, const Matrix& s,
                       const testing::OutputLoss& loss) {
  std::vector<ParamRef> params;
  net.collect_params(params);
  const double h = 1e-5;
  double worst = 0.0;
  for (const auto& p : params) {
    for (Eigen::Index i = 0; i < p.value->size(); ++i) {
      const double v = p.value->data()[i];
      p.value->data()[i] = v + h;
      const double fp = loss(testing::ref_transformation_forward(net, x, s, Mode::Train));
      p.value->data()[i] = v - h;
      const double fm = loss(testing::ref_transformation_forward(net, x, s, Mode::Train));
      p.value->data()[i] = v;
      const double numeric = (fp - fm) / (2 * h);
      const double analytic = p.grad->data()[i];
      worst = std::max(worst, std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-6}));
    }
  }
  return worst;
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("transformation parameter counts match the closed form") {
  const TransformationDims dims{128, 128, 128};
  CHECK(count_params(build_transformation(dims, 1.0, false, 1)) == 5717120);
  CHECK(count_params(build_transformation(dims, 0.5, false, 1)) == closed_form_params(128, 128, 128, 1024));
  CHECK(count_params(build_transformation(dims, 0.5, false, 1)) == 1909888);
  CHECK(count_params(build_transformation(dims, 0.25, false, 1)) == 792704);
  CHECK(count_params(build_transformation(dims, 2.0, false, 1)) == 19623040);
  CHECK(count_params(build_transformation({8, 16, 4}, 0.125, false, 1)) == closed_form_params(8, 16, 4, 256));
}

TEST_CASE("transformation MACs are the sum of affine in*out") {
  const auto net = build_transformation({128, 128, 128}, 1.0, false, 1);
  const std::size_t expected = 2 * (128 * 256 + 256 * 256) + 512 * 2048 + 2048 * 2048 + 2048 * 128;
  CHECK(expected == 5701632);
  CHECK(count_macs(net) == expected);
}

TEST_CASE("width multiplier outside the sweep is rejected") {
  CHECK(scaled_width(2048, 0.125) == 256);
  CHECK_THROWS_AS(scaled_width(2048, 0.3), ConfigError);
  CHECK_THROWS_AS(build_transformation({8, 8, 8}, 3.0, false, 1), ConfigError);
}

TEST_CASE("transformation forward matches the reference in every mode") {
  for (bool normalize : {false, true}) {
    Rng rng(5);
    auto net = build_transformation({8, 6, 5}, 0.125, normalize, 11);
    for (int i = 0; i < 3; ++i) net.forward(random_matrix(9, 8, rng), random_matrix(9, 6, rng), Mode::Train);
    const Matrix x = random_matrix(9, 8, rng);
    const Matrix s = random_matrix(9, 6, rng);
    const Matrix eval = net.infer(x, s, Mode::Eval);
    CHECK((eval - testing::ref_transformation_forward(net, x, s, Mode::Eval)).cwiseAbs().maxCoeff() < 1e-10);
    auto copy = net;
    const Matrix train = copy.forward(x, s, Mode::Train);
    CHECK((train - testing::ref_transformation_forward(net, x, s, Mode::Train)).cwiseAbs().maxCoeff() < 1e-10);
    if (normalize) {
      for (Eigen::Index r = 0; r < eval.rows(); ++r) CHECK(std::abs(eval.row(r).norm() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("infer leaves BN statistics alone, train forward moves them") {
  Rng rng(6);
  auto net = build_transformation({4, 4, 4}, 0.125, false, 3);
  const auto& bn = std::get<BatchNormLayer>(net.mixer().layers()[1]);
  const Matrix before = bn.running_mean;
  net.infer(random_matrix(5, 4, rng), random_matrix(5, 4, rng), Mode::Train);
  CHECK(bn.running_mean == before);
  net.forward(random_matrix(5, 4, rng), random_matrix(5, 4, rng), Mode::Train);
  CHECK(bn.running_mean != before);
  net.freeze_bn_stats();
  const Matrix frozen = bn.running_mean;
  net.forward(random_matrix(5, 4, rng), random_matrix(5, 4, rng), Mode::Train);
  CHECK(bn.running_mean == frozen);
}

TEST_CASE("transformation rejects mismatched inputs") {
  Rng rng(7);
  auto net = build_transformation({4, 3, 2}, 0.125, false, 3);
  CHECK_THROWS_AS(net.forward(random_matrix(5, 3, rng), random_matrix(5, 3, rng), Mode::Train), ShapeError);
  CHECK_THROWS_AS(net.forward(random_matrix(5, 4, rng), random_matrix(4, 3, rng), Mode::Train), ShapeError);
  Sequential po = make_mlp({4, 6}, true, false, rng);
  Sequential ps = make_mlp({3, 6}, true, false, rng);
  Sequential mx = make_mlp({11, 2}, false, true, rng);
  CHECK_THROWS_AS(TransformationNet({4, 3, 2}, 1.0, false, po, ps, mx), ShapeError);
}

TEST_CASE("fast transformation gradient oracle agrees with a brute-force recompute") {
  for (bool normalize : {false, true}) {
    Rng rng(normalize ? 21 : 20);
    auto net = tiny_transformation(normalize, rng);
    const Matrix x = random_matrix(6, 5, rng);
    const Matrix s = random_matrix(6, 3, rng);
    const Matrix target = random_matrix(6, 4, rng);
    const auto loss = [&](const Matrix& o) { return testing::ref_mse(o, target); };
    net.zero_grad();
    const Matrix out = net.forward(x, s, Mode::Train);
    const auto [gx, gs] = net.backward(mse_loss(out, target).grad);
    const auto fast = testing::check_transformation_gradients(net, x, s, gx, gs, loss);
    INFO("normalize " << normalize);
    CHECK(fast.max_rel_error < 1e-4);
    CHECK(naive_max_error(net, x, s, loss) < 1e-4);
    std::vector<ParamRef> params;
    net.collect_params(params);
    std::size_t total = static_cast<std::size_t>(x.size() + s.size());
    for (const auto& p : params) total += static_cast<std::size_t>(p.value->size());
    CHECK(fast.coordinates + fast.skipped_kinks == total);
    CHECK(fast.skipped_kinks * 100 < total);
  }
}

TEST_CASE("fast oracle flags a wrong gradient") {
  Rng rng(22);
  auto net = tiny_transformation(false, rng);
  const Matrix x = random_matrix(6, 5, rng);
  const Matrix s = random_matrix(6, 3, rng);
  const Matrix target = random_matrix(6, 4, rng);
  net.zero_grad();
  const auto [gx, gs] = net.backward(mse_loss(net.forward(x, s, Mode::Train), target).grad);
  std::get<AffineLayer>(net.mixer().layers()[3]).grad_weight(1, 2) += 0.01;
  const auto check = testing::check_transformation_gradients(
      net, x, s, gx, gs, [&](const Matrix& o) { return testing::ref_mse(o, target); });
  CHECK(check.max_rel_error > 1e-3);
}

TEST_CASE("transformation gradients with frozen BN and KL losses") {
  Rng rng(23);
  auto net = build_transformation({4, 4, 3}, 0.125, false, 9);
  for (int i = 0; i < 2; ++i) net.forward(random_matrix(6, 4, rng), random_matrix(6, 4, rng), Mode::Train);
  net.freeze_bn_stats();
  const AffineLayer head = AffineLayer::uniform_init(3, 5, rng);
  const Matrix x = random_matrix(6, 4, rng);
  const Matrix s = random_matrix(6, 4, rng);
  const Matrix target = random_matrix(6, 3, rng);
  for (bool reversed : {false, true}) {
    net.zero_grad();
    const Matrix out = net.forward(x, s, Mode::Train);
    const auto loss = kl_distillation_loss(out, target, head, reversed);
    CHECK(loss.value == doctest::Approx(testing::ref_kl(out, target, head, reversed)).epsilon(1e-12));
    const auto [gx, gs] = net.backward(loss.grad);
    const auto check = testing::check_transformation_gradients(
        net, x, s, gx, gs, testing::ref_kl_to(target, head, reversed));
    INFO("reversed " << reversed);
    CHECK(check.max_rel_error < 1e-4);
    CHECK(check.skipped_kinks * 100 < check.coordinates);
  }
}

TEST_CASE("embedder layout and shapes") {
  const auto net = build_embedder(32, 64, 2, 16, 4, 1);
  CHECK(net.input_dim() == 32);
  CHECK(net.embedding_dim() == 16);
  CHECK(net.num_classes() == 4);
  // Affine BN ReLU twice, then the embedding affine.
  REQUIRE(net.backbone.layers().size() == 7);
  CHECK(net.backbone.param_count() == (32 * 64 + 64) + 128 + (64 * 64 + 64) + 128 + (64 * 16 + 16));
  const auto linear = build_embedder(8, 64, 0, 3, 2, 1);
  CHECK(linear.backbone.layers().size() == 1);
  Rng rng(2);
  CHECK(embed(net, random_matrix(5, 32, rng)).cols() == 16);
  CHECK_THROWS_AS(embed(net, random_matrix(5, 31, rng)), ShapeError);
}

TEST_CASE("embedder logits gradient matches finite differences") {
  Rng rng(3);
  auto net = build_embedder(6, 8, 1, 4, 3, 5);
  const Matrix x = random_matrix(7, 6, rng);
  const std::vector<int> labels{0, 1, 2, 0, 1, 2, 0};
  net.zero_grad();
  net.backward_logits(cross_entropy_loss(net.forward_logits(x, Mode::Train), labels).grad);
  std::vector<ParamRef> params;
  net.collect_params(params);
  double worst = 0.0;
  const double h = 1e-5;
  const auto f = [&] {
    Matrix logits = testing::ref_apply(Layer{net.head}, testing::ref_forward(net.backbone.layers(), 0, x, Mode::Train), Mode::Eval);
    return cross_entropy_loss(logits, labels).value;
  };
  for (const auto& p : params) {
    for (Eigen::Index i = 0; i < p.value->size(); ++i) {
      const double v = p.value->data()[i];
      p.value->data()[i] = v + h;
      const double fp = f();
      p.value->data()[i] = v - h;
      const double fm = f();
      p.value->data()[i] = v;
      const double numeric = (fp - fm) / (2 * h);
      worst = std::max(worst, std::abs(numeric - p.grad->data()[i]) /
                                  std::max({std::abs(numeric), std::abs(p.grad->data()[i]), 1e-6}));
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("autoencoder is a plain mirrored chain") {
  const auto ae = build_autoencoder(32, 64, 2, 16, 1);
  CHECK(ae.input_dim() == 32);
  CHECK(ae.code_dim() == 16);
  CHECK(ae.decoder.out_dim() == 32);
  for (const auto& layer : ae.encoder.layers()) CHECK_FALSE(std::holds_alternative<BatchNormLayer>(layer));
  Rng rng(4);
  CHECK(ae.reconstruct(random_matrix(3, 32, rng)).cols() == 32);
}

}  // TEST_SUITE
