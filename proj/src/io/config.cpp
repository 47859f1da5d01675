#include "fct/io/config.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "fct/error.hpp"
#include "fct/io/binary.hpp"
#include "fct/models/transformation.hpp"
#include "fct/rng.hpp"

namespace fct::io {

using nlohmann::json;
using nlohmann::ordered_json;

std::uint64_t SeedConfig::get(const std::optional<std::uint64_t>& explicit_seed, const char* stage) const {
  return explicit_seed ? *explicit_seed : derive_seed(master, stage);
}

namespace {

// Walks one JSON object, rejecting keys nobody asked for.
class Section {
 public:
  Section(const Section&) = delete;
  Section(Section&&) = default;
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key '" + path_ + "." + key + "'");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong type");
    }
  }

  void read_optional_u64(const std::string& key, std::optional<std::uint64_t>& out) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (v.is_null()) {
      out.reset();
      return;
    }
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigError(path_ + "." + key + ": expected a non-negative integer or null");
    }
    out = v.get<std::uint64_t>();
  }

  void read_optional_size(const std::string& key, std::optional<std::size_t>& out) {
    std::optional<std::uint64_t> v;
    if (out) v = *out;
    read_optional_u64(key, v);
    out = v ? std::optional<std::size_t>(static_cast<std::size_t>(*v)) : std::nullopt;
  }

  Section child(const std::string& key) { return Section(obj_.at(key), path_ + "." + key); }
  const json& raw(const std::string& key) const { return obj_.at(key); }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_train(Section& parent, const std::string& key, TrainConfig& t) {
  if (!parent.has(key)) return;
  Section s = parent.child(key);
  s.read("epochs", t.epochs);
  s.read("batch_size", t.batch_size);
  s.read("lr", t.adam.lr);
  s.read("weight_decay", t.adam.weight_decay);
  s.read("beta1", t.adam.beta1);
  s.read("beta2", t.adam.beta2);
  s.read("adam_eps", t.adam.eps);
  s.read("warmup_epochs", t.warmup_epochs);
  s.read_optional_size("bn_freeze_epoch", t.bn_freeze_epoch);
}

ordered_json train_json(const TrainConfig& t) {
  ordered_json j;
  j["epochs"] = t.epochs;
  j["batch_size"] = t.batch_size;
  j["lr"] = t.adam.lr;
  j["weight_decay"] = t.adam.weight_decay;
  j["beta1"] = t.adam.beta1;
  j["beta2"] = t.adam.beta2;
  j["adam_eps"] = t.adam.eps;
  j["warmup_epochs"] = t.warmup_epochs;
  j["bn_freeze_epoch"] = t.bn_freeze_epoch ? ordered_json(*t.bn_freeze_epoch) : ordered_json(nullptr);
  return j;
}

TrainConfig default_embedder_train() {
  TrainConfig t;
  t.epochs = 30;
  t.batch_size = 128;
  t.adam.lr = 2e-3;
  t.warmup_epochs = 2;
  t.bn_freeze_epoch.reset();
  return t;
}

TrainConfig default_side_info_train() {
  // Autoencoder recipe: Adam, weight decay 0, cosine decay with warmup.
  TrainConfig t;
  t.epochs = 40;
  t.batch_size = 128;
  t.adam.lr = 2e-3;
  t.adam.weight_decay = 0.0;
  t.warmup_epochs = 2;
  t.bn_freeze_epoch.reset();
  return t;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (name.empty()) throw ConfigError("name must be non-empty");
  if (domain.colors == 0 || domain.shapes == 0 || domain.colors * domain.shapes < 2) {
    throw ConfigError("domain needs colors * shapes >= 2");
  }
  if (domain.dim < domain.colors + domain.shapes) throw ConfigError("domain.dim must be >= colors + shapes");
  if (!(domain.sigma >= 0.0)) throw ConfigError("domain.sigma must be >= 0");
  auto check_shapes = [&](const std::vector<int>& shapes, const std::string& what) {
    if (shapes.empty()) throw ConfigError(what + " must be non-empty");
    for (int s : shapes) {
      if (s < 0 || static_cast<std::size_t>(s) >= domain.shapes) throw ConfigError(what + " has shape out of range");
    }
  };
  check_shapes(data.old_shapes, "data.old_shapes");
  check_shapes(data.new_shapes, "data.new_shapes");
  if (data.old_labels != "color" && data.old_labels != "joint") {
    throw ConfigError("data.old_labels must be 'color' or 'joint'");
  }
  if (data.train_per_cell == 0 || data.eval_per_class == 0) {
    throw ConfigError("data.train_per_cell and data.eval_per_class must be >= 1");
  }
  if (kind == ExperimentKind::Sequence) {
    if (data.version_shapes.size() < 2) throw ConfigError("sequence experiments need at least two versions");
    for (const auto& v : data.version_shapes) check_shapes(v, "data.version_shapes entry");
  }
  if (model.d_old == 0 || model.d_new == 0 || model.d_side == 0 || model.hidden == 0) {
    throw ConfigError("model dims must be >= 1");
  }
  scaled_width(TransformationNet::kMixerWidth, model.width_multiplier);
  if (kind == ExperimentKind::Sequence && model.d_old != model.d_new) {
    throw ConfigError("sequence experiments use one embedding width for every version (d_old == d_new)");
  }
  if (kind == ExperimentKind::Sequence && loss != LossKind::Mse) {
    throw ConfigError("sequence experiments train every hop with mse");
  }
  side_info.validate();
  train_embedder.validate();
  train_side_info.validate();
  train_transformation.validate();
  if (ks.empty()) throw ConfigError("eval.ks must be non-empty");
  for (auto k : ks) {
    if (k == 0) throw ConfigError("eval.ks entries must be >= 1");
  }
  if (output_dir.empty()) throw ConfigError("output_dir must be non-empty");
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  cfg.train_embedder = default_embedder_train();
  cfg.train_side_info = default_side_info_train();
  {
    Section root(doc, "config");
    std::string kind = "fct";
    root.read("experiment", kind);
    if (kind == "fct") {
      cfg.kind = ExperimentKind::Fct;
    } else if (kind == "sequence") {
      cfg.kind = ExperimentKind::Sequence;
    } else {
      throw ConfigError("experiment must be 'fct' or 'sequence'");
    }
    root.read("name", cfg.name);
    root.read("output_dir", cfg.output_dir);
    if (root.has("seeds")) {
      Section s = root.child("seeds");
      s.read("master", cfg.seeds.master);
      s.read_optional_u64("domain", cfg.seeds.domain);
      s.read_optional_u64("data", cfg.seeds.data);
      s.read_optional_u64("old_model", cfg.seeds.old_model);
      s.read_optional_u64("new_model", cfg.seeds.new_model);
      s.read_optional_u64("side_info", cfg.seeds.side_info);
      s.read_optional_u64("transformation", cfg.seeds.transformation);
    }
    if (root.has("domain")) {
      Section s = root.child("domain");
      s.read("colors", cfg.domain.colors);
      s.read("shapes", cfg.domain.shapes);
      s.read("dim", cfg.domain.dim);
      s.read("sigma", cfg.domain.sigma);
    }
    if (root.has("data")) {
      Section s = root.child("data");
      s.read("old_shapes", cfg.data.old_shapes);
      s.read("old_labels", cfg.data.old_labels);
      s.read("new_shapes", cfg.data.new_shapes);
      s.read("train_per_cell", cfg.data.train_per_cell);
      s.read("eval_per_class", cfg.data.eval_per_class);
      s.read("version_shapes", cfg.data.version_shapes);
    }
    if (root.has("model")) {
      Section s = root.child("model");
      s.read("hidden", cfg.model.hidden);
      s.read("depth", cfg.model.depth);
      s.read("d_old", cfg.model.d_old);
      s.read("d_new", cfg.model.d_new);
      s.read("d_side", cfg.model.d_side);
      s.read("width_multiplier", cfg.model.width_multiplier);
      s.read("normalize_output", cfg.model.normalize_output);
    }
    if (root.has("side_info")) {
      Section s = root.child("side_info");
      std::string k = to_string(cfg.side_info.kind);
      s.read("kind", k);
      cfg.side_info.kind = parse_side_info_kind(k);
      s.read("hidden", cfg.side_info.hidden);
      s.read("depth", cfg.side_info.depth);
      s.read("mixup_alpha", cfg.side_info.mixup_alpha);
      s.read("temperature", cfg.side_info.temperature);
      s.read("augment_noise_std", cfg.side_info.augment_noise_std);
    }
    std::string loss = to_string(cfg.loss);
    root.read("loss", loss);
    cfg.loss = parse_loss_kind(loss);
    if (root.has("train")) {
      Section s = root.child("train");
      read_train(s, "embedder", cfg.train_embedder);
      read_train(s, "side_info", cfg.train_side_info);
      read_train(s, "transformation", cfg.train_transformation);
    }
    if (root.has("eval")) {
      Section s = root.child("eval");
      s.read("ks", cfg.ks);
      s.read("zero_side_baseline", cfg.zero_side_baseline);
    }
    if (root.has("costs")) {
      Section s = root.child("costs");
      s.read("devices", cfg.costs.devices);
      s.read("records_per_device", cfg.costs.records_per_device);
      s.read("image_bytes", cfg.costs.image_bytes);
      s.read_optional_u64("new_model_macs", cfg.costs.new_model_macs);
    }
  }
  cfg.train_transformation.loss = cfg.loss;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

std::string config_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["experiment"] = cfg.kind == ExperimentKind::Fct ? "fct" : "sequence";
  j["name"] = cfg.name;
  j["output_dir"] = cfg.output_dir;
  const auto& s = cfg.seeds;
  j["seeds"] = {{"master", s.master},
                {"domain", s.get(s.domain, "domain")},
                {"data", s.get(s.data, "data")},
                {"old_model", s.get(s.old_model, "old_model")},
                {"new_model", s.get(s.new_model, "new_model")},
                {"side_info", s.get(s.side_info, "side_info")},
                {"transformation", s.get(s.transformation, "transformation")}};
  j["domain"] = {{"colors", cfg.domain.colors},
                 {"shapes", cfg.domain.shapes},
                 {"dim", cfg.domain.dim},
                 {"sigma", cfg.domain.sigma}};
  j["data"] = {{"old_shapes", cfg.data.old_shapes},
               {"old_labels", cfg.data.old_labels},
               {"new_shapes", cfg.data.new_shapes},
               {"train_per_cell", cfg.data.train_per_cell},
               {"eval_per_class", cfg.data.eval_per_class},
               {"version_shapes", cfg.data.version_shapes}};
  j["model"] = {{"hidden", cfg.model.hidden},
                {"depth", cfg.model.depth},
                {"d_old", cfg.model.d_old},
                {"d_new", cfg.model.d_new},
                {"d_side", cfg.model.d_side},
                {"width_multiplier", cfg.model.width_multiplier},
                {"normalize_output", cfg.model.normalize_output}};
  j["side_info"] = {{"kind", to_string(cfg.side_info.kind)},
                    {"hidden", cfg.side_info.hidden},
                    {"depth", cfg.side_info.depth},
                    {"mixup_alpha", cfg.side_info.mixup_alpha},
                    {"temperature", cfg.side_info.temperature},
                    {"augment_noise_std", cfg.side_info.augment_noise_std}};
  j["loss"] = to_string(cfg.loss);
  j["train"] = {{"embedder", train_json(cfg.train_embedder)},
                {"side_info", train_json(cfg.train_side_info)},
                {"transformation", train_json(cfg.train_transformation)}};
  j["eval"] = {{"ks", cfg.ks}, {"zero_side_baseline", cfg.zero_side_baseline}};
  j["costs"] = {{"devices", cfg.costs.devices},
                {"records_per_device", cfg.costs.records_per_device},
                {"image_bytes", cfg.costs.image_bytes},
                {"new_model_macs", cfg.costs.new_model_macs ? ordered_json(*cfg.costs.new_model_macs)
                                                            : ordered_json(nullptr)}};
  return j.dump(2) + "\n";
}

}  // namespace fct::io
