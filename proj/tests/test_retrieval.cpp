#include <doctest.h>

#include <cmath>

#include "fct/error.hpp"
#include "fct/retrieval/cka.hpp"
#include "fct/retrieval/metrics.hpp"
#include "fct/retrieval/report.hpp"
#include "fct/retrieval/search.hpp"
#include "oracles.hpp"

using namespace fct;
using fct::testing::random_matrix;

namespace {

GalleryStore small_gallery() {
  Matrix emb(4, 2);
  emb << 0, 0, 1, 0, 0, 1, 1, 0;  // rows 1 and 3 tie
  return GalleryStore({10, 30, 20, 25}, {0, 1, 0, 1}, emb, Matrix(4, 0), 1, false);
}

}  // namespace

TEST_SUITE("retrieval") {

TEST_CASE("knn ranks by distance, ties by id, and skips the excluded id") {
  const auto g = small_gallery();
  const std::vector<double> q{0.9, 0.0};
  CHECK(knn_rank(q, g) == std::vector<std::uint64_t>{25, 30, 10, 20});
  CHECK(knn_rank(q, g, 25) == std::vector<std::uint64_t>{30, 10, 20});
  CHECK(knn_rank_rows(q, g) == std::vector<std::size_t>{3, 1, 0, 2});
  CHECK_THROWS_AS(knn_rank(std::vector<double>{1.0}, g), ShapeError);
}

TEST_CASE("average precision worked examples") {
  const bool a[] = {true, false, true, false};
  CHECK(average_precision(a) == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0));
  const bool none[] = {false, false};
  CHECK(average_precision(none) == 0.0);
  const bool last[] = {false, false, false, true};
  CHECK(average_precision(last) == doctest::Approx(0.25));
}

TEST_CASE("metrics agree with the brute-force oracles on random instances") {
  Rng rng(77);
  for (int i = 0; i < 60; ++i) {
    const auto check = testing::check_metric_instance(rng, i % 2 == 1);
    INFO("instance " << i);
    CHECK(check.rankings_equal);
    CHECK(check.max_cmc_error <= 1e-12);
    CHECK(check.max_ap_error <= 1e-12);
    CHECK(check.cka_error <= 1e-12);
  }
}

TEST_CASE("queries whose class is absent are skipped, not scored") {
  const auto g = small_gallery();
  QuerySet q;
  q.ids = {1, 2};
  q.labels = {0, 7};
  q.embeddings = Matrix::Zero(2, 2);
  const std::vector<std::size_t> ks{1};
  const auto res = cmc(q, g, ks);
  CHECK(res.evaluated == 1);
  CHECK(res.skipped == 1);
  CHECK(res.top_k.at(1) == 1.0);
  CHECK(map_at_1(q, g).value == doctest::Approx(1.0));
  const std::vector<std::size_t> zero{0};
  CHECK_THROWS_AS(cmc(q, g, zero), ConfigError);
  CHECK_THROWS_AS(cmc(q, GalleryStore(), ks), StateError);
}

TEST_CASE("results do not depend on the worker count") {
  Rng rng(3);
  const Matrix emb = random_matrix(300, 6, rng);
  std::vector<std::uint64_t> ids(300);
  std::vector<std::uint32_t> labels(300);
  for (std::size_t i = 0; i < 300; ++i) {
    ids[i] = i;
    labels[i] = static_cast<std::uint32_t>(rng.below(7));
  }
  const GalleryStore g(ids, labels, emb, Matrix(300, 0), 1, false);
  QuerySet q;
  q.embeddings = random_matrix(57, 6, rng);
  for (std::size_t i = 0; i < 57; ++i) {
    q.ids.push_back(i * 3);
    q.labels.push_back(static_cast<std::uint32_t>(rng.below(7)));
  }
  const auto one = evaluate_queries(q, g, {true, 1});
  for (std::size_t threads : {2u, 4u, 64u}) {
    const auto many = evaluate_queries(q, g, {true, threads});
    for (std::size_t i = 0; i < one.size(); ++i) {
      CHECK(many[i].first_hit == one[i].first_hit);
      CHECK(many[i].average_precision == one[i].average_precision);
    }
  }
}

TEST_CASE("CKA invariances") {
  Rng rng(4);
  const Matrix x = random_matrix(40, 6, rng);
  CHECK(std::abs(cka_linear(x, x) - 1.0) < 1e-12);
  for (double alpha : {0.5, 1.7}) {
    CHECK(std::abs(cka_linear(x, alpha * x * testing::random_orthogonal(6, rng)) - 1.0) < 1e-10);
  }
  CHECK(cka_linear(x, Matrix::Zero(40, 3)) == 0.0);
  CHECK(cka_linear(x, Matrix::Constant(40, 3, 2.0)) == 0.0);
  // Translation does not matter after centering.
  const Matrix y = random_matrix(40, 2, rng);
  const Matrix shifted = (x.array() + 3.0).matrix();
  CHECK(std::abs(cka_linear(x, y) - cka_linear(shifted, y)) < 1e-10);
  CHECK_THROWS(cka_linear(x.topRows(1), x.topRows(1)));
  CHECK_THROWS_AS(cka_linear(x, random_matrix(39, 2, rng)), ShapeError);
}

TEST_CASE("gallery invariants") {
  Matrix emb(2, 2);
  emb << 1, 0, 0, 1;
  CHECK_THROWS_AS(GalleryStore({1, 1}, {0, 0}, emb, Matrix(2, 0), 1, false), StateError);
  CHECK_THROWS_AS(GalleryStore({1, 2}, {0}, emb, Matrix(2, 0), 1, false), ShapeError);
  Matrix loose = emb * 2.0;
  CHECK_THROWS(GalleryStore({1, 2}, {0, 0}, loose, Matrix(2, 0), 1, true));
  const GalleryStore ok({1, 2}, {0, 0}, emb, Matrix(2, 0), 1, true);
  CHECK(ok.normalized());
  Rng rng(5);
  const GalleryStore noisy({1, 2}, {0, 0}, random_matrix(2, 2, rng), Matrix(2, 0), 1, false);
  const auto q = noisy.quantized_f32();
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(q.embeddings().data()[i] == static_cast<double>(static_cast<float>(noisy.embeddings().data()[i])));
  }
}

TEST_CASE("pairing report carries per-group CMC and CKA") {
  const auto g = small_gallery();
  QuerySet q;
  q.ids = {1, 2};
  q.labels = {0, 1};
  q.embeddings = Matrix::Zero(2, 2);
  PairingOptions opts;
  opts.ks = {1, 2};
  opts.groups = {{0, "a"}};
  Rng rng(6);
  const Matrix e = random_matrix(4, 2, rng);
  const auto r = evaluate_pairing("x/y", q, g, opts, std::make_pair(e, e));
  CHECK(r.case_name == "x/y");
  CHECK(r.query_count == 2);
  CHECK(r.cmc.at(1) == 0.5);
  CHECK(r.per_group_cmc.at("a").at(1) == 1.0);
  CHECK(r.per_group_cmc.at("other").at(1) == 0.0);
  REQUIRE(r.cka.has_value());
  CHECK(*r.cka == doctest::Approx(1.0));
}

}  // TEST_SUITE
