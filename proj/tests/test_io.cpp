#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "fct/error.hpp"
#include "fct/io/checkpoint.hpp"
#include "fct/io/config.hpp"
#include "fct/io/gallery_file.hpp"
#include "fct/io/report_io.hpp"
#include "oracles.hpp"

using namespace fct;
using fct::testing::random_matrix;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fct_unit_io";
  fs::create_directories(dir);
  return dir / name;
}

GalleryStore f32_gallery(std::size_t n, std::size_t d_emb, std::size_t d_side, Rng& rng) {
  std::vector<std::uint64_t> ids(n);
  std::vector<std::uint32_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = rng.next_u64();
    labels[i] = static_cast<std::uint32_t>(rng.next_u64());
  }
  return GalleryStore(ids, labels, random_matrix(n, d_emb, rng), random_matrix(n, d_side, rng), 1, false)
      .quantized_f32();
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("gallery bytes follow the documented layout") {
  Matrix emb(1, 1), side(1, 0);
  emb << 0.5;
  const GalleryStore g({7}, {3}, emb, side, 1, false);
  const std::string bytes = io::encode_gallery(g);
  REQUIRE(bytes.size() == 4 + 4 + 1 + 4 + 4 + 8 + (8 + 4 + 4) + 4);
  CHECK(bytes.substr(0, 4) == "FCTG");
  CHECK(bytes[4] == 1);
  std::uint64_t id = 0;
  std::memcpy(&id, bytes.data() + 25, 8);
  CHECK(id == 7);
  float v = 0;
  std::memcpy(&v, bytes.data() + 37, 4);
  CHECK(v == 0.5f);
}

TEST_CASE("gallery files round-trip, including empty and side-less stores") {
  Rng rng(1);
  for (auto [n, d_side] : {std::pair<std::size_t, std::size_t>{200, 5}, {0, 5}, {50, 0}, {0, 0}}) {
    const auto g = f32_gallery(n, 7, d_side, rng);
    const auto path = scratch("g.fctg");
    io::save_gallery(g, path);
    const auto back = io::load_gallery(path);
    INFO("n " << n << " d_side " << d_side);
    CHECK(back == g);
    CHECK(io::encode_gallery(back) == io::encode_gallery(g));
  }
}

TEST_CASE("corrupted gallery files are rejected") {
  Rng rng(2);
  const std::string good = io::encode_gallery(f32_gallery(20, 4, 2, rng));
  for (std::size_t pos : {std::size_t{0}, std::size_t{5}, std::size_t{40}, good.size() - 1}) {
    std::string bad = good;
    bad[pos] = static_cast<char>(bad[pos] ^ 0x10);
    CHECK_THROWS_AS(io::decode_gallery(bad), CorruptionError);
  }
  CHECK_THROWS_AS(io::decode_gallery(good.substr(0, good.size() - 9)), CorruptionError);
  CHECK_THROWS_AS(io::decode_gallery(""), CorruptionError);
  CHECK_THROWS_AS(io::load_gallery(scratch("missing.fctg")), IoError);
}

TEST_CASE("gallery version travels in the sidecar") {
  Rng rng(3);
  const auto path = scratch("v.fctg");
  io::save_gallery(f32_gallery(3, 2, 1, rng), path);
  io::save_gallery_meta(path, 4, "unit test");
  CHECK(io::load_gallery_version(path) == 4);
  CHECK(io::load_gallery(path, 4).version() == 4);
}

TEST_CASE("checkpoints reload bit-identically") {
  Rng rng(4);
  auto h = build_transformation({5, 3, 4}, 0.125, true, 9);
  h.forward(random_matrix(6, 5, rng), random_matrix(6, 3, rng), Mode::Train);
  h.freeze_bn_stats();
  const auto path = scratch("h.ckpt");
  io::save_checkpoint(h, path);
  const auto back = io::load_transformation(path);
  const Matrix x = random_matrix(4, 5, rng), s = random_matrix(4, 3, rng);
  CHECK(back.infer(x, s) == h.infer(x, s));
  CHECK(back.normalize_output());
  CHECK(std::get<BatchNormLayer>(back.mixer().layers()[1]).stats_frozen());

  const auto emb = build_embedder(5, 8, 1, 3, 4, 2);
  io::save_checkpoint(emb, scratch("e.ckpt"));
  const auto emb_back = io::load_embedder(scratch("e.ckpt"));
  CHECK(emb_back.embed(x, Mode::Eval) == emb.embed(x, Mode::Eval));
  CHECK(emb_back.head.weight == emb.head.weight);
  CHECK_THROWS_AS(io::load_transformation(scratch("e.ckpt")), CorruptionError);

  std::string bytes = read_all(path);
  bytes[bytes.size() / 2] ^= 1;
  std::ofstream(scratch("bad.ckpt"), std::ios::binary) << bytes;
  CHECK_THROWS_AS(io::load_transformation(scratch("bad.ckpt")), CorruptionError);
}

TEST_CASE("config parsing is strict") {
  const auto base = nlohmann::json::parse(R"({"experiment": "fct", "seeds": {"master": 5}})");
  const auto cfg = io::parse_config(base.dump());
  CHECK(cfg.seeds.master == 5);
  CHECK(cfg.kind == io::ExperimentKind::Fct);

  auto unknown = base;
  unknown["model"]["widht_multiplier"] = 1.0;
  CHECK_THROWS_AS(io::parse_config(unknown.dump()), ConfigError);
  auto typo = base;
  typo["train"]["transformation"]["epoch"] = 3;
  CHECK_THROWS_AS(io::parse_config(typo.dump()), ConfigError);
  auto bad_width = base;
  bad_width["model"]["width_multiplier"] = 0.3;
  CHECK_THROWS_AS(io::parse_config(bad_width.dump()), ConfigError);
  auto bad_type = base;
  bad_type["domain"]["dim"] = "large";
  CHECK_THROWS_AS(io::parse_config(bad_type.dump()), ConfigError);
  auto seq_kl = base;
  seq_kl["experiment"] = "sequence";
  seq_kl["loss"] = "kl";
  CHECK_THROWS_AS(io::parse_config(seq_kl.dump()), ConfigError);
  CHECK_THROWS_AS(io::parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(io::load_config(scratch("missing.json")), ConfigError);
}

TEST_CASE("resolved config round-trips through JSON") {
  const auto cfg = io::load_config(fs::path(FCT_SOURCE_DIR) / "configs" / "toy_imagenet_analog.json");
  const std::string resolved = io::config_to_json(cfg);
  const auto again = io::parse_config(resolved);
  CHECK(io::config_to_json(again) == resolved);
  CHECK(again.train_transformation.bn_freeze_epoch == cfg.train_transformation.bn_freeze_epoch);
}

TEST_CASE("report formats") {
  RetrievalReport r;
  r.case_name = "new/old";
  r.cmc = {{1, 0.125}, {5, 0.5}};
  r.map_at_1 = 0.25;
  RetrievalReport c = r;
  c.case_name = "new/h(old,psi)";
  c.cka = 0.0;
  const std::string csv = io::retrieval_csv({r, c});
  CHECK(csv == "case,cmc_top1,cmc_top5,map,cka\nnew/old,0.1250,0.5000,0.2500,\nnew/h(old,psi),0.1250,0.5000,0.2500,0.0000\n");
  const auto j = nlohmann::json::parse(io::retrieval_json({r, c}));
  CHECK(j.size() == 2);
  CHECK(io::format_fixed4(0.99995) == "1.0000");
  TrainHistory h;
  h.epoch_loss = {0.1, 1.0 / 3.0};
  const std::string loss = io::loss_history_csv(h);
  CHECK(loss.rfind("epoch,loss\n0,", 0) == 0);
  CHECK(std::stod(loss.substr(loss.rfind(',') + 1)) == 1.0 / 3.0);
}

}  // TEST_SUITE
