#include <doctest.h>

#include "fct/error.hpp"
#include "fct/update/cost.hpp"
#include "fct/update/update.hpp"
#include "oracles.hpp"

using namespace fct;
using fct::testing::random_matrix;

namespace {

GalleryStore random_gallery(std::size_t n, std::size_t d_emb, std::size_t d_side, Rng& rng) {
  std::vector<std::uint64_t> ids(n);
  std::vector<std::uint32_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = 5 * i + 1;
    labels[i] = static_cast<std::uint32_t>(rng.below(4));
  }
  return GalleryStore(ids, labels, random_matrix(n, d_emb, rng), random_matrix(n, d_side, rng), 1, false);
}

}  // namespace

TEST_SUITE("update") {

TEST_CASE("fct update rewrites embeddings and keeps ids and labels") {
  Rng rng(1);
  const auto g = random_gallery(37, 6, 4, rng);
  const auto h = build_transformation({6, 4, 5}, 0.125, true, 2);
  const auto g_net = build_transformation({6, 4, 3}, 0.125, false, 3);
  const auto out = apply_fct_update(g, h, &g_net, 2, 8);
  CHECK(out.version() == 2);
  CHECK(out.ids() == g.ids());
  CHECK(out.labels() == g.labels());
  CHECK(out.normalized());
  CHECK((out.embeddings() - h.infer(g.embeddings(), g.side_info())).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((out.side_info() - g_net.infer(g.embeddings(), g.side_info())).cwiseAbs().maxCoeff() < 1e-12);
  // Eval-mode rows are independent, so the batch size does not matter.
  const auto whole = apply_fct_update(g, h, &g_net, 2, 1000);
  CHECK((whole.embeddings() - out.embeddings()).cwiseAbs().maxCoeff() < 1e-12);
  const auto terminal = apply_fct_update(g, h, nullptr, 2);
  CHECK(terminal.d_side() == 0);
}

TEST_CASE("update errors") {
  Rng rng(2);
  const auto g = random_gallery(10, 6, 4, rng);
  const auto h = build_transformation({6, 4, 5}, 0.125, false, 2);
  CHECK_THROWS_AS(apply_fct_update(g, h, nullptr, 1), StateError);
  const auto wrong = build_transformation({5, 4, 5}, 0.125, false, 2);
  CHECK_THROWS_AS(apply_fct_update(g, wrong, nullptr, 2), ShapeError);
  CHECK_THROWS_AS(apply_fct_update(g, h, nullptr, 2, 0), ConfigError);
  UpdatePlan plan;
  plan.from_version = 2;
  plan.to_version = 3;
  plan.step.h = &h;
  CHECK_THROWS_AS(apply_plan(g, plan), StateError);
  plan.from_version = 1;
  plan.to_version = 2;
  plan.strategy = UpdateStrategy::FullBackfillCentral;
  CHECK_THROWS_AS(apply_plan(g, plan), ConfigError);
  plan.strategy = UpdateStrategy::FctTransform;
  CHECK(apply_plan(g, plan).version() == 2);
}

TEST_CASE("sequence of hops equals applying them one by one") {
  Rng rng(3);
  const auto g = random_gallery(20, 6, 4, rng);
  const auto h1 = build_transformation({6, 4, 6}, 0.125, false, 4);
  const auto g1 = build_transformation({6, 4, 4}, 0.125, false, 5);
  const auto h2 = build_transformation({6, 4, 6}, 0.125, false, 6);
  const auto seq = apply_sequence(g, {{&h1, &g1}, {&h2, nullptr}});
  const auto manual = apply_fct_update(apply_fct_update(g, h1, &g1, 2), h2, nullptr, 3);
  CHECK(seq.version() == 3);
  CHECK(seq == manual);
  const auto direct = apply_direct(g, h2, 3);
  CHECK(direct.version() == 3);
  CHECK_THROWS_AS(apply_sequence(g, {{&h1, nullptr}, {&h2, nullptr}}), ShapeError);
  CHECK_THROWS_AS(apply_sequence(g, {}), ConfigError);
}

TEST_CASE("cost report arithmetic") {
  DeploymentModel d;
  d.device_count = 10;
  d.records_per_device = 100;
  d.image_bytes = 1000;
  d.d_new = 8;
  d.d_side = 4;
  d.new_model_macs = 50;
  d.h_macs = 7;
  d.g_macs = 3;
  d.h_params = 11;
  d.g_params = 2;
  const auto r = cost_report(d);
  REQUIRE(r.strategies.size() == 4);
  CHECK(r.at(UpdateStrategy::FullBackfillCentral).server_macs == 50 * 1000);
  CHECK(r.at(UpdateStrategy::FullBackfillCentral).bytes_transferred_server_to_device == 8 * 4 * 1000);
  CHECK(r.at(UpdateStrategy::FullBackfillDownload).device_macs == 50 * 1000);
  CHECK(r.at(UpdateStrategy::FullBackfillDownload).bytes_transferred_server_to_device == 1000 * 1000);
  CHECK(r.at(UpdateStrategy::FctTransform).device_macs == 10 * 1000);
  CHECK(r.at(UpdateStrategy::FctTransform).bytes_transferred_server_to_device == 13 * 4 * 10);
  CHECK(r.at(UpdateStrategy::FctTransform).bytes_stored_per_record == 12 * 4);
  CHECK(r.at(UpdateStrategy::NoUpdate).device_macs == 0);
}

TEST_CASE("costs scale linearly with records and fct transfer does not") {
  const auto h = build_transformation({8, 8, 8}, 0.125, false, 1);
  const auto base = deployment_for(7, 100, 1000, h, nullptr);
  const auto twice = deployment_for(7, 200, 1000, h, nullptr);
  for (auto s : {UpdateStrategy::FullBackfillCentral, UpdateStrategy::FullBackfillDownload, UpdateStrategy::FctTransform}) {
    const auto a = strategy_cost(base, s), b = strategy_cost(twice, s);
    CHECK(b.server_macs == 2 * a.server_macs);
    CHECK(b.device_macs == 2 * a.device_macs);
  }
  CHECK(strategy_cost(base, UpdateStrategy::FctTransform).bytes_transferred_server_to_device ==
        strategy_cost(twice, UpdateStrategy::FctTransform).bytes_transferred_server_to_device);
  CHECK(base.h_macs == count_macs(h));
  CHECK(base.transformation_weight_bytes() == 4 * count_params(h));
}

TEST_CASE("cost model overflow is an error") {
  DeploymentModel d;
  d.device_count = 1ull << 40;
  d.records_per_device = 1ull << 30;
  CHECK_THROWS_AS(d.total_records(), NumericError);
}

}  // TEST_SUITE
