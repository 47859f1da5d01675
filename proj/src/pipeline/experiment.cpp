#include "fct/pipeline/experiment.hpp"

#include <sstream>

#include "fct/error.hpp"
#include "fct/io/binary.hpp"
#include "fct/io/checkpoint.hpp"
#include "fct/io/gallery_file.hpp"
#include "fct/io/report_io.hpp"
#include "fct/numerics/ops.hpp"
#include "fct/rng.hpp"
#include "fct/training/trainers.hpp"
#include "fct/update/update.hpp"

namespace fct::pipeline {

namespace {

using io::ExperimentConfig;
using io::ExperimentKind;

// Query ids live above every gallery id so self-exclusion never triggers
// between the disjoint query and gallery draws.
constexpr std::uint64_t kQueryIdOffset = std::uint64_t{1} << 32;

std::uint64_t seed_of(const ExperimentConfig& cfg, const char* stage) {
  const auto& s = cfg.seeds;
  const std::string name = stage;
  if (name == "domain") return s.get(s.domain, "domain");
  if (name == "data") return s.get(s.data, "data");
  if (name == "old_model") return s.get(s.old_model, "old_model");
  if (name == "new_model") return s.get(s.new_model, "new_model");
  if (name == "side_info") return s.get(s.side_info, "side_info");
  return s.get(s.transformation, "transformation");
}

std::vector<int> all_colors(const ExperimentConfig& cfg) { return iota_subset(cfg.domain.colors); }
std::vector<int> all_shapes(const ExperimentConfig& cfg) { return iota_subset(cfg.domain.shapes); }

LabelMode old_label_mode(const ExperimentConfig& cfg) {
  return cfg.data.old_labels == "joint" ? LabelMode::Joint : LabelMode::Color;
}

TrainConfig with_seed(TrainConfig tc, std::uint64_t seed) {
  tc.seed = seed;
  return tc;
}

void require_kind(const ExperimentConfig& cfg, ExperimentKind kind, const char* stage) {
  if (cfg.kind != kind) {
    throw ConfigError(std::string("stage '") + stage + "' is not part of a " +
                      (cfg.kind == ExperimentKind::Fct ? "fct" : "sequence") + " experiment; use 'run'");
  }
}

void require_inputs(const std::vector<std::filesystem::path>& paths, const char* stage) {
  for (const auto& p : paths) {
    if (!std::filesystem::exists(p)) {
      throw IoError(std::string(stage) + ": missing input " + p.string() + " (run the earlier stages first)");
    }
  }
}

GalleryStore set_to_store(const LabeledSet& set) {
  std::vector<std::uint64_t> ids(set.size());
  std::vector<std::uint32_t> labels(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    ids[i] = i;
    labels[i] = static_cast<std::uint32_t>(set.joint[i]);
  }
  return GalleryStore(std::move(ids), std::move(labels), quantize_f32(set.inputs), Matrix(set.inputs.rows(), 0), 1,
                      false);
}

LabeledSet store_to_set(const GalleryStore& store, const ExperimentConfig& cfg, LabelMode mode) {
  LabeledSet set;
  set.inputs = store.embeddings();
  set.label_mode = mode;
  set.num_colors = cfg.domain.colors;
  set.num_shapes = cfg.domain.shapes;
  const auto shapes = static_cast<std::uint32_t>(cfg.domain.shapes);
  for (std::uint32_t label : store.labels()) {
    if (label >= cfg.domain.colors * cfg.domain.shapes) throw CorruptionError("data file label out of range");
    set.joint.push_back(static_cast<int>(label));
    set.colors.push_back(static_cast<int>(label / shapes));
    set.shapes.push_back(static_cast<int>(label % shapes));
  }
  return set;
}

LabeledSet load_set(const Layout& layout, const std::string& name, const ExperimentConfig& cfg, LabelMode mode) {
  const GalleryStore store = io::load_gallery(layout.data(name));
  if (store.d_emb() != cfg.domain.dim) throw ConfigError("data file " + name + " does not match domain.dim");
  return store_to_set(store, cfg, mode);
}

void save_set(const Layout& layout, const std::string& name, const LabeledSet& set) {
  io::save_gallery(set_to_store(set), layout.data(name));
}

void save_history(const Layout& layout, const std::string& name, const TrainHistory& history) {
  io::write_file_atomic(layout.loss(name), io::loss_history_csv(history));
}

Matrix features(const EmbedderNet& net, const Matrix& inputs, bool normalize) {
  Matrix f = net.embed(inputs, Mode::Eval);
  if (normalize) f = normalize_rows(f);
  return f;
}

GalleryStore make_store(const LabeledSet& set, Matrix emb, Matrix side, std::uint32_t version, bool normalized) {
  std::vector<std::uint64_t> ids(set.size());
  std::vector<std::uint32_t> labels(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    ids[i] = i;
    labels[i] = static_cast<std::uint32_t>(set.joint[i]);
  }
  return GalleryStore(std::move(ids), std::move(labels), quantize_f32(emb), quantize_f32(side), version, normalized);
}

GalleryStore with_side(const GalleryStore& store, Matrix side) {
  return GalleryStore(store.ids(), store.labels(), store.embeddings(), std::move(side), store.version(),
                      store.normalized());
}

QuerySet make_queries(const LabeledSet& set, const Matrix& emb) {
  QuerySet q;
  for (std::size_t i = 0; i < set.size(); ++i) {
    q.ids.push_back(kQueryIdOffset + i);
    q.labels.push_back(static_cast<std::uint32_t>(set.joint[i]));
  }
  q.embeddings = quantize_f32(emb);
  return q;
}

PairingOptions pairing_options(const ExperimentConfig& cfg) {
  PairingOptions opt;
  opt.ks = cfg.ks;
  if (cfg.kind == ExperimentKind::Fct) {
    for (std::size_t c = 0; c < cfg.domain.colors; ++c) {
      for (std::size_t s = 0; s < cfg.domain.shapes; ++s) {
        bool seen = false;
        for (int o : cfg.data.old_shapes) seen = seen || o == static_cast<int>(s);
        opt.groups[static_cast<std::uint32_t>(c * cfg.domain.shapes + s)] = seen ? "seen_shapes" : "unseen_shapes";
      }
    }
  }
  return opt;
}

TransformationNet new_transformation(const ExperimentConfig& cfg, std::size_t d_old, std::size_t d_side,
                                     std::size_t d_out, bool normalize, std::uint64_t seed) {
  return build_transformation({d_old, d_side, d_out}, cfg.model.width_multiplier, normalize, seed);
}

void write_reports(const Layout& layout, const std::vector<RetrievalReport>& reports) {
  io::write_file_atomic(layout.file("reports.csv"), io::retrieval_csv(reports));
  io::write_file_atomic(layout.file("reports.json"), io::retrieval_json(reports));
  io::write_file_atomic(layout.file("per_group.csv"), io::per_group_csv(reports));
}

void write_costs(const Layout& layout, const UpdateCostReport& costs) {
  io::write_file_atomic(layout.file("costs.csv"), io::cost_csv(costs));
  io::write_file_atomic(layout.file("costs.json"), io::cost_json(costs));
}

UpdateCostReport costs_for(const ExperimentConfig& cfg, const EmbedderNet& new_model, const TransformationNet& h,
                           const TransformationNet* g) {
  const std::uint64_t new_macs =
      cfg.costs.new_model_macs ? *cfg.costs.new_model_macs
                               : static_cast<std::uint64_t>(count_macs(new_model.backbone));
  DeploymentModel dep = deployment_for(cfg.costs.devices, cfg.costs.records_per_device, new_macs, h, g);
  dep.image_bytes = cfg.costs.image_bytes;
  return cost_report(dep);
}

// Direct cross-model comparison needs a common width; the narrower side is
// zero-padded.
Matrix pad_cols(const Matrix& m, Eigen::Index cols) {
  if (m.cols() >= cols) return m;
  Matrix out = Matrix::Zero(m.rows(), cols);
  out.leftCols(m.cols()) = m;
  return out;
}

QuerySet padded(QuerySet q, std::size_t cols) {
  q.embeddings = pad_cols(q.embeddings, static_cast<Eigen::Index>(cols));
  return q;
}

GalleryStore padded(const GalleryStore& g, Eigen::Index cols) {
  if (static_cast<Eigen::Index>(g.d_emb()) >= cols) return g;
  return GalleryStore(g.ids(), g.labels(), pad_cols(g.embeddings(), cols), g.side_info(), g.version(), false);
}

std::string version_name(std::size_t i) { return "v" + std::to_string(i + 1); }

}  // namespace

DataSplits generate_data(const ExperimentConfig& cfg) {
  DataSplits d;
  d.domain = make_domain(seed_of(cfg, "domain"), cfg.domain.colors, cfg.domain.shapes, cfg.domain.dim,
                         cfg.domain.sigma);
  const std::uint64_t data_seed = seed_of(cfg, "data");
  const auto colors = all_colors(cfg);
  const auto shapes = all_shapes(cfg);
  if (cfg.kind == ExperimentKind::Fct) {
    d.train_old = sample_per_cell(d.domain, cfg.data.train_per_cell, colors, cfg.data.old_shapes,
                                  old_label_mode(cfg), derive_seed(data_seed, "train_old"));
    d.train_new = sample_per_cell(d.domain, cfg.data.train_per_cell, colors, cfg.data.new_shapes, LabelMode::Joint,
                                  derive_seed(data_seed, "train_new"));
  } else {
    for (std::size_t i = 0; i < cfg.data.version_shapes.size(); ++i) {
      d.train_versions.push_back(sample_per_cell(d.domain, cfg.data.train_per_cell, colors,
                                                 cfg.data.version_shapes[i], LabelMode::Joint,
                                                 derive_seed(data_seed, ("train_" + version_name(i)).c_str())));
    }
  }
  d.gallery = sample_per_cell(d.domain, cfg.data.eval_per_class, colors, shapes, LabelMode::Joint,
                              derive_seed(data_seed, "gallery"));
  d.query = sample_per_cell(d.domain, cfg.data.eval_per_class, colors, shapes, LabelMode::Joint,
                            derive_seed(data_seed, "query"));
  return d;
}

std::vector<std::string> stage_plan(const ExperimentConfig& cfg) {
  if (cfg.kind == ExperimentKind::Sequence) {
    return {"gen-data", "train-embedders", "train-side-info", "train-hops", "train-direct", "update", "eval",
            "simulate-costs"};
  }
  return {"gen-data",        "train-embedder(old)", "train-embedder(new)", "train-side-info",
          "train-transform", "update",              "eval",                "simulate-costs"};
}

std::string describe_plan(const ExperimentConfig& cfg) {
  std::ostringstream out;
  const auto& m = cfg.model;
  const std::size_t cells = cfg.domain.colors;
  out << "experiment " << cfg.name << " (" << (cfg.kind == ExperimentKind::Fct ? "fct" : "sequence") << ")\n";
  out << "output " << cfg.output_dir << "\n";
  out << "seeds master=" << cfg.seeds.master << " domain=" << seed_of(cfg, "domain")
      << " data=" << seed_of(cfg, "data") << " old_model=" << seed_of(cfg, "old_model")
      << " new_model=" << seed_of(cfg, "new_model") << " side_info=" << seed_of(cfg, "side_info")
      << " transformation=" << seed_of(cfg, "transformation") << "\n";
  const std::size_t classes = cfg.domain.colors * cfg.domain.shapes;
  const std::size_t eval_n = classes * cfg.data.eval_per_class;
  const TransformationNet h = new_transformation(cfg, m.d_old, m.d_side, m.d_new, m.normalize_output, 0);
  std::size_t step = 1;
  for (const auto& stage : stage_plan(cfg)) {
    out << step++ << ". " << stage;
    if (stage == "gen-data") {
      if (cfg.kind == ExperimentKind::Fct) {
        out << ": train_old " << cells * cfg.data.old_shapes.size() * cfg.data.train_per_cell << " ("
            << cfg.data.old_labels << " labels), train_new "
            << cells * cfg.data.new_shapes.size() * cfg.data.train_per_cell;
      } else {
        out << ":";
        for (std::size_t i = 0; i < cfg.data.version_shapes.size(); ++i) {
          out << " train_" << version_name(i) << " " << cells * cfg.data.version_shapes[i].size() * cfg.data.train_per_cell;
        }
      }
      out << ", gallery " << eval_n << ", query " << eval_n;
    } else if (stage.rfind("train-embedder", 0) == 0 || stage == "train-embedders") {
      out << ": " << cfg.domain.dim << " -> " << m.hidden << " x" << m.depth << " -> d=" << m.d_new << ", "
          << cfg.train_embedder.epochs << " epochs";
    } else if (stage == "train-side-info") {
      out << ": " << to_string(cfg.side_info.kind) << ", d_side=" << m.d_side << ", "
          << cfg.train_side_info.epochs << " epochs";
    } else if (stage == "train-transform" || stage == "train-hops" || stage == "train-direct") {
      out << ": h(" << m.d_old << "," << m.d_side << ")->" << m.d_new << ", width " << m.width_multiplier << ", "
          << count_params(h) << " params, " << count_macs(h) << " MACs/record, loss " << to_string(cfg.loss) << ", "
          << cfg.train_transformation.epochs << " epochs";
      if (cfg.zero_side_baseline || cfg.kind == ExperimentKind::Sequence) out << ", plus psi=0 baseline";
    } else if (stage == "eval") {
      out << ": ks";
      for (auto k : cfg.ks) out << " " << k;
    } else if (stage == "simulate-costs") {
      out << ": " << cfg.costs.devices << " devices x " << cfg.costs.records_per_device << " records";
    }
    out << "\n";
  }
  return out.str();
}

void stage_gen_data(const ExperimentConfig& cfg, const Layout& layout) {
  const DataSplits d = generate_data(cfg);
  if (cfg.kind == ExperimentKind::Fct) {
    save_set(layout, "train_old", d.train_old);
    save_set(layout, "train_new", d.train_new);
  } else {
    for (std::size_t i = 0; i < d.train_versions.size(); ++i) save_set(layout, "train_" + version_name(i), d.train_versions[i]);
  }
  save_set(layout, "gallery", d.gallery);
  save_set(layout, "query", d.query);
}

void stage_train_embedder(const ExperimentConfig& cfg, const Layout& layout, const std::string& which) {
  require_kind(cfg, ExperimentKind::Fct, "train-embedder");
  if (which != "old" && which != "new") throw ConfigError("embedder must be 'old' or 'new'");
  const bool old = which == "old";
  require_inputs({layout.data(old ? "train_old" : "train_new")}, "train-embedder");
  const LabeledSet set = load_set(layout, old ? "train_old" : "train_new", cfg, old ? old_label_mode(cfg) : LabelMode::Joint);
  const std::uint64_t seed = seed_of(cfg, old ? "old_model" : "new_model");
  EmbedderNet net = build_embedder(cfg.domain.dim, cfg.model.hidden, cfg.model.depth,
                                   old ? cfg.model.d_old : cfg.model.d_new, set.num_classes(),
                                   derive_seed(seed, "init"));
  const TrainHistory hist = train_embedder(net, set, with_seed(cfg.train_embedder, seed));
  io::save_checkpoint(net, layout.model(which));
  save_history(layout, which + "_embedder", hist);
}

void stage_train_side_info(const ExperimentConfig& cfg, const Layout& layout) {
  require_kind(cfg, ExperimentKind::Fct, "train-side-info");
  require_inputs({layout.data("train_old"), layout.data("gallery"), layout.model("old")}, "train-side-info");
  const LabeledSet set = load_set(layout, "train_old", cfg, old_label_mode(cfg));
  const LabeledSet gallery = load_set(layout, "gallery", cfg, LabelMode::Joint);
  const EmbedderNet old_model = io::load_embedder(layout.model("old"));
  TrainHistory hist;
  const SideInfoModel psi = train_side_info(cfg.side_info, set, cfg.model.d_side,
                                            with_seed(cfg.train_side_info, seed_of(cfg, "side_info")), &hist);
  // v1 deployment: every gallery item stores the old embedding and psi.
  const GalleryStore v1 = make_store(gallery, features(old_model, gallery.inputs, false), psi.infer(gallery.inputs), 1, false);
  io::save_checkpoint(psi, layout.model("side"));
  save_history(layout, "side_info", hist);
  io::save_gallery(v1, layout.gallery("gallery_v1"));
  io::save_gallery_meta(layout.gallery("gallery_v1"), 1, "old embedding + " + to_string(psi.kind) + " side-information");
}

void stage_train_transform(const ExperimentConfig& cfg, const Layout& layout) {
  require_kind(cfg, ExperimentKind::Fct, "train-transform");
  require_inputs({layout.data("train_new"), layout.model("old"), layout.model("new"), layout.model("side")},
                 "train-transform");
  const LabeledSet set = load_set(layout, "train_new", cfg, LabelMode::Joint);
  const EmbedderNet old_model = io::load_embedder(layout.model("old"));
  const EmbedderNet new_model = io::load_embedder(layout.model("new"));
  const SideInfoModel psi = io::load_side_info(layout.model("side"));
  const Matrix old_f = features(old_model, set.inputs, false);
  // Targets are the raw new embeddings; the trainer normalizes them when h does.
  const Matrix new_f = features(new_model, set.inputs, false);
  const std::uint64_t seed = seed_of(cfg, "transformation");
  const AffineLayer* head = cfg.loss == LossKind::Mse ? nullptr : &new_model.head;

  TransformationNet h = new_transformation(cfg, cfg.model.d_old, psi.dim, cfg.model.d_new, cfg.model.normalize_output,
                                           derive_seed(seed, "h/init"));
  const TrainHistory hist = train_transformation(h, old_f, psi.infer(set.inputs), new_f,
                                                 with_seed(cfg.train_transformation, derive_seed(seed, "h")), head);
  std::optional<TransformationNet> h0;
  TrainHistory hist0;
  if (cfg.zero_side_baseline) {
    h0 = new_transformation(cfg, cfg.model.d_old, psi.dim, cfg.model.d_new, cfg.model.normalize_output,
                            derive_seed(seed, "h_zero/init"));
    const Matrix zeros = Matrix::Zero(set.inputs.rows(), static_cast<Eigen::Index>(psi.dim));
    hist0 = train_transformation(*h0, old_f, zeros, new_f,
                                 with_seed(cfg.train_transformation, derive_seed(seed, "h_zero")), head);
  }
  io::save_checkpoint(h, layout.model("h"));
  save_history(layout, "transformation", hist);
  if (h0) {
    io::save_checkpoint(*h0, layout.model("h_zero"));
    save_history(layout, "transformation_zero", hist0);
  }
}

void stage_update(const ExperimentConfig& cfg, const Layout& layout) {
  require_kind(cfg, ExperimentKind::Fct, "update");
  std::vector<std::filesystem::path> inputs{layout.gallery("gallery_v1"), layout.model("h")};
  if (cfg.zero_side_baseline) inputs.push_back(layout.model("h_zero"));
  require_inputs(inputs, "update");
  const GalleryStore v1 = io::load_gallery(layout.gallery("gallery_v1"), io::load_gallery_version(layout.gallery("gallery_v1")));
  const TransformationNet h = io::load_transformation(layout.model("h"));
  std::optional<TransformationNet> h0;
  if (cfg.zero_side_baseline) h0 = io::load_transformation(layout.model("h_zero"));

  const std::uint32_t to = v1.version() + 1;
  const GalleryStore v2 = apply_fct_update(v1, h, nullptr, to).quantized_f32();
  io::save_gallery(v2, layout.gallery("gallery_v2"));
  io::save_gallery_meta(layout.gallery("gallery_v2"), to, "h(old, psi)");
  if (h0) {
    const GalleryStore zero_side = with_side(v1, Matrix::Zero(static_cast<Eigen::Index>(v1.size()), static_cast<Eigen::Index>(v1.d_side())));
    const GalleryStore v2z = apply_fct_update(zero_side, *h0, nullptr, to).quantized_f32();
    io::save_gallery(v2z, layout.gallery("gallery_v2_zero"));
    io::save_gallery_meta(layout.gallery("gallery_v2_zero"), to, "h(old, 0)");
  }
}

std::vector<RetrievalReport> stage_eval(const ExperimentConfig& cfg, const Layout& layout) {
  require_kind(cfg, ExperimentKind::Fct, "eval");
  std::vector<std::filesystem::path> inputs{layout.data("gallery"), layout.data("query"),   layout.model("old"),
                                            layout.model("new"),    layout.model("side"),   layout.model("h"),
                                            layout.gallery("gallery_v1"), layout.gallery("gallery_v2")};
  if (cfg.zero_side_baseline) {
    inputs.push_back(layout.model("h_zero"));
    inputs.push_back(layout.gallery("gallery_v2_zero"));
  }
  require_inputs(inputs, "eval");
  const LabeledSet gallery = load_set(layout, "gallery", cfg, LabelMode::Joint);
  const LabeledSet query = load_set(layout, "query", cfg, LabelMode::Joint);
  const EmbedderNet old_model = io::load_embedder(layout.model("old"));
  const EmbedderNet new_model = io::load_embedder(layout.model("new"));
  const SideInfoModel psi = io::load_side_info(layout.model("side"));
  const TransformationNet h = io::load_transformation(layout.model("h"));
  const GalleryStore v1 = io::load_gallery(layout.gallery("gallery_v1"), io::load_gallery_version(layout.gallery("gallery_v1")));
  const GalleryStore v2 = io::load_gallery(layout.gallery("gallery_v2"), io::load_gallery_version(layout.gallery("gallery_v2")));
  if (v1.size() != gallery.size() || v2.size() != gallery.size()) {
    throw CorruptionError("stored galleries do not match data/gallery.fctg");
  }
  const bool norm = cfg.model.normalize_output;
  const PairingOptions opt = pairing_options(cfg);

  // Query-side features, kept at stored precision like the gallery.
  const Matrix q_old = quantize_f32(features(old_model, query.inputs, false));
  const Matrix q_side = quantize_f32(psi.infer(query.inputs));
  const QuerySet queries_old = make_queries(query, q_old);
  const QuerySet queries_new = make_queries(query, features(new_model, query.inputs, norm));
  const QuerySet queries_h = make_queries(query, h.infer(q_old, q_side, Mode::Eval));
  const GalleryStore backfilled = make_store(gallery, features(new_model, gallery.inputs, norm),
                                             Matrix(gallery.inputs.rows(), 0), v2.version(), norm);

  std::vector<RetrievalReport> reports;
  reports.push_back(evaluate_pairing("old/old", queries_old, v1, opt));
  reports.push_back(evaluate_pairing("new/new", queries_new, backfilled, opt));
  reports.push_back(evaluate_pairing("new/old", padded(queries_new, v1.d_emb()), padded(v1, queries_new.embeddings.cols()), opt));
  reports.push_back(evaluate_pairing("new/h(old,psi)", queries_new, v2, opt,
                                     std::make_pair(v1.embeddings(), v1.side_info())));
  reports.push_back(evaluate_pairing("h(old,psi)/h(old,psi)", queries_h, v2, opt));
  if (cfg.zero_side_baseline) {
    const TransformationNet h0 = io::load_transformation(layout.model("h_zero"));
    const GalleryStore v2z = io::load_gallery(layout.gallery("gallery_v2_zero"),
                                              io::load_gallery_version(layout.gallery("gallery_v2_zero")));
    const Matrix zeros_q = Matrix::Zero(q_old.rows(), static_cast<Eigen::Index>(h0.dims().d_side));
    const QuerySet queries_h0 = make_queries(query, h0.infer(q_old, zeros_q, Mode::Eval));
    reports.push_back(evaluate_pairing("new/h(old,0)", queries_new, v2z, opt,
                                       std::make_pair(v1.embeddings(), Matrix(Matrix::Zero(v1.embeddings().rows(), v1.side_info().cols())))));
    reports.push_back(evaluate_pairing("h(old,0)/h(old,0)", queries_h0, v2z, opt));
  }
  write_reports(layout, reports);
  return reports;
}

UpdateCostReport stage_simulate_costs(const ExperimentConfig& cfg, const Layout& layout) {
  if (cfg.kind == ExperimentKind::Sequence) {
    require_inputs({layout.model("phi_v2"), layout.model("h_v2")}, "simulate-costs");
    // The first hop carries side-information forward, so it ships both h and g.
    std::optional<TransformationNet> g;
    if (std::filesystem::exists(layout.model("g_v2"))) g = io::load_transformation(layout.model("g_v2"));
    const UpdateCostReport costs = costs_for(cfg, io::load_embedder(layout.model("phi_v2")),
                                             io::load_transformation(layout.model("h_v2")), g ? &*g : nullptr);
    write_costs(layout, costs);
    return costs;
  }
  require_inputs({layout.model("new"), layout.model("h")}, "simulate-costs");
  const UpdateCostReport costs =
      costs_for(cfg, io::load_embedder(layout.model("new")), io::load_transformation(layout.model("h")), nullptr);
  write_costs(layout, costs);
  return costs;
}

std::vector<RetrievalReport> run_sequence(const ExperimentConfig& cfg, const Layout& layout) {
  require_kind(cfg, ExperimentKind::Sequence, "run_sequence");
  stage_gen_data(cfg, layout);
  const std::size_t k = cfg.data.version_shapes.size();
  const LabeledSet gallery = load_set(layout, "gallery", cfg, LabelMode::Joint);
  const LabeledSet query = load_set(layout, "query", cfg, LabelMode::Joint);
  std::vector<LabeledSet> train;
  for (std::size_t i = 0; i < k; ++i) train.push_back(load_set(layout, "train_" + version_name(i), cfg, LabelMode::Joint));

  const bool norm = cfg.model.normalize_output;
  const std::size_t d = cfg.model.d_new;
  const std::size_t d_side = cfg.model.d_side;
  const std::uint64_t model_seed = seed_of(cfg, "new_model");
  const std::uint64_t side_seed = seed_of(cfg, "side_info");
  const std::uint64_t t_seed = seed_of(cfg, "transformation");

  // Independently trained per-version embedding and side-information models.
  std::vector<EmbedderNet> phi;
  std::vector<SideInfoModel> psi;
  for (std::size_t i = 0; i < k; ++i) {
    const std::string v = version_name(i);
    const std::uint64_t seed = derive_seed(model_seed, v.c_str());
    EmbedderNet net = build_embedder(cfg.domain.dim, cfg.model.hidden, cfg.model.depth, d, train[i].num_classes(),
                                     derive_seed(seed, "init"));
    save_history(layout, "phi_" + v, train_embedder(net, train[i], with_seed(cfg.train_embedder, seed)));
    io::save_checkpoint(net, layout.model("phi_" + v));
    phi.push_back(std::move(net));
    TrainHistory hist;
    psi.push_back(train_side_info(cfg.side_info, train[i], d_side,
                                  with_seed(cfg.train_side_info, derive_seed(side_seed, v.c_str())), &hist));
    save_history(layout, "psi_" + v, hist);
    io::save_checkpoint(psi.back(), layout.model("psi_" + v));
  }

  // Hop i -> i+1 is trained on the v_{i+1} training set from the actual
  // v_i features; g carries side-information forward except on the last hop.
  std::vector<TransformationNet> hs, gs, hs_zero;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    const std::string v = version_name(i + 1);
    const LabeledSet& set = train[i + 1];
    const Matrix emb_prev = features(phi[i], set.inputs, false);
    const Matrix side_prev = psi[i].infer(set.inputs);
    const Matrix emb_next = features(phi[i + 1], set.inputs, false);
    const Matrix zeros = Matrix::Zero(set.inputs.rows(), static_cast<Eigen::Index>(d_side));
    const std::uint64_t seed = derive_seed(t_seed, v.c_str());
    TransformationNet h = new_transformation(cfg, d, d_side, d, norm, derive_seed(seed, "h/init"));
    if (i + 2 < k) {
      TransformationNet g = new_transformation(cfg, d, d_side, d_side, false, derive_seed(seed, "g/init"));
      const SequenceStepHistory hist = train_sequence_step(h, g, emb_prev, side_prev, emb_next, psi[i + 1].infer(set.inputs),
                                                           with_seed(cfg.train_transformation, derive_seed(seed, "hop")));
      save_history(layout, "h_" + v, hist.h);
      save_history(layout, "g_" + v, hist.g);
      io::save_checkpoint(g, layout.model("g_" + v));
      gs.push_back(std::move(g));
    } else {
      save_history(layout, "h_" + v,
                   train_transformation(h, emb_prev, side_prev, emb_next,
                                        with_seed(cfg.train_transformation, derive_seed(seed, "h"))));
    }
    io::save_checkpoint(h, layout.model("h_" + v));
    hs.push_back(std::move(h));

    TransformationNet h0 = new_transformation(cfg, d, d_side, d, norm, derive_seed(seed, "h_zero/init"));
    save_history(layout, "h_zero_" + v,
                 train_transformation(h0, emb_prev, zeros, emb_next,
                                      with_seed(cfg.train_transformation, derive_seed(seed, "h_zero"))));
    io::save_checkpoint(h0, layout.model("h_zero_" + v));
    hs_zero.push_back(std::move(h0));
  }

  // Direct long hop v1 -> vk on the vk training set.
  const LabeledSet& last = train[k - 1];
  const Matrix emb_first = features(phi[0], last.inputs, false);
  const Matrix side_first = psi[0].infer(last.inputs);
  const Matrix emb_last = features(phi[k - 1], last.inputs, false);
  const std::uint64_t direct_seed = derive_seed(t_seed, "direct");
  TransformationNet h_direct = new_transformation(cfg, d, d_side, d, norm, derive_seed(direct_seed, "h/init"));
  save_history(layout, "h_direct", train_transformation(h_direct, emb_first, side_first, emb_last,
                                                        with_seed(cfg.train_transformation, derive_seed(direct_seed, "h"))));
  io::save_checkpoint(h_direct, layout.model("h_direct"));
  TransformationNet h_direct0 = new_transformation(cfg, d, d_side, d, norm, derive_seed(direct_seed, "h_zero/init"));
  save_history(layout, "h_zero_direct",
               train_transformation(h_direct0, emb_first, Matrix::Zero(last.inputs.rows(), static_cast<Eigen::Index>(d_side)),
                                    emb_last, with_seed(cfg.train_transformation, derive_seed(direct_seed, "h_zero"))));
  io::save_checkpoint(h_direct0, layout.model("h_zero_direct"));

  // v1 deployment and its updates.
  const Matrix zero_side = Matrix::Zero(static_cast<Eigen::Index>(gallery.size()), static_cast<Eigen::Index>(d_side));
  const GalleryStore v1 = make_store(gallery, features(phi[0], gallery.inputs, false), psi[0].infer(gallery.inputs), 1, false);
  io::save_gallery(v1, layout.gallery("gallery_v1"));
  io::save_gallery_meta(layout.gallery("gallery_v1"), 1, "v1 embedding + side-information");
  std::vector<UpdateStep> chain;
  for (std::size_t i = 0; i + 1 < k; ++i) chain.push_back({&hs[i], i < gs.size() ? &gs[i] : nullptr});
  const GalleryStore seq = apply_sequence(v1, chain).quantized_f32();
  const GalleryStore direct = apply_direct(v1, h_direct, static_cast<std::uint32_t>(k)).quantized_f32();
  // Without side-information nothing is stored besides the embedding; every
  // hop sees psi = 0.
  GalleryStore seq0 = with_side(v1, zero_side);
  for (std::size_t i = 0; i + 1 < k; ++i) {
    seq0 = apply_fct_update(seq0, hs_zero[i], nullptr, seq0.version() + 1).quantized_f32();
    seq0 = with_side(seq0, zero_side);
  }
  const GalleryStore direct0 = apply_direct(with_side(v1, zero_side), h_direct0, static_cast<std::uint32_t>(k)).quantized_f32();
  const std::string vk = version_name(k - 1);
  io::save_gallery(seq, layout.gallery("gallery_" + vk + "_seq"));
  io::save_gallery_meta(layout.gallery("gallery_" + vk + "_seq"), seq.version(), "sequential updates from v1");
  io::save_gallery(direct, layout.gallery("gallery_" + vk + "_direct"));
  io::save_gallery_meta(layout.gallery("gallery_" + vk + "_direct"), direct.version(), "direct update from v1");

  const PairingOptions opt = pairing_options(cfg);
  const QuerySet q_first = make_queries(query, features(phi[0], query.inputs, false));
  const QuerySet q_last = make_queries(query, features(phi[k - 1], query.inputs, norm));
  const GalleryStore backfilled = make_store(gallery, features(phi[k - 1], gallery.inputs, norm),
                                             Matrix(gallery.inputs.rows(), 0), static_cast<std::uint32_t>(k), norm);
  std::vector<RetrievalReport> reports;
  reports.push_back(evaluate_pairing("v1/v1", q_first, v1, opt));
  reports.push_back(evaluate_pairing(vk + "/" + vk, q_last, backfilled, opt));
  reports.push_back(evaluate_pairing(vk + "/v1", q_last, v1, opt));
  reports.push_back(evaluate_pairing(vk + "/seq(v1)", q_last, seq, opt));
  reports.push_back(evaluate_pairing(vk + "/direct(v1)", q_last, direct, opt));
  reports.push_back(evaluate_pairing(vk + "/seq(v1;psi=0)", q_last, seq0, opt));
  reports.push_back(evaluate_pairing(vk + "/direct(v1;psi=0)", q_last, direct0, opt));
  write_reports(layout, reports);
  stage_simulate_costs(cfg, layout);
  return reports;
}

std::vector<RetrievalReport> run_all(const ExperimentConfig& cfg, const Layout& layout) {
  io::write_file_atomic(layout.file("config.resolved.json"), io::config_to_json(cfg));
  if (cfg.kind == ExperimentKind::Sequence) return run_sequence(cfg, layout);
  stage_gen_data(cfg, layout);
  stage_train_embedder(cfg, layout, "old");
  stage_train_embedder(cfg, layout, "new");
  stage_train_side_info(cfg, layout);
  stage_train_transform(cfg, layout);
  stage_update(cfg, layout);
  auto reports = stage_eval(cfg, layout);
  stage_simulate_costs(cfg, layout);
  return reports;
}

double top1(const std::vector<RetrievalReport>& reports, const std::string& case_name) {
  for (const auto& r : reports) {
    if (r.case_name == case_name) {
      auto it = r.cmc.find(1);
      if (it == r.cmc.end()) throw StateError("report " + case_name + " has no top-1 CMC");
      return it->second;
    }
  }
  throw StateError("no report named " + case_name);
}

}  // namespace fct::pipeline
