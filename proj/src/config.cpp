#include "bsuv/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "bsuv/error.hpp"

namespace bsuv {

namespace {

// Reads known keys from one JSON object and rejects everything else.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw Error(Errc::InvalidConfig, where_ + ": expected an object");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!v.is_number_integer()) fail(key, "expected an integer");
    }
    try {
      if constexpr (std::is_same_v<T, fs::path>) {
        out = fs::path(v.get<std::string>());
      } else {
        out = v.get<T>();
      }
    } catch (const json::exception& e) {
      fail(key, e.what());
    }
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw Error(Errc::InvalidConfig, fmt::format("{}: unknown key '{}'", where_, k));
    }
  }

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    throw Error(Errc::InvalidConfig, fmt::format("{}.{}: {}", where_, key, why));
  }

  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

NetworkConfig read_network(const json& j, const std::string& where) {
  NetworkConfig c;
  Fields f(j, where);
  f.get("stage_widths", c.stage_widths);
  f.get("convs_per_stage", c.convs_per_stage);
  f.get("dropout_rate", c.dropout_rate);
  f.finish();
  return c;
}

TrainConfig read_train(const json& j, const std::string& where) {
  TrainConfig c;
  Fields f(j, where);
  f.get("learning_rate", c.learning_rate);
  f.get("beta1", c.beta1);
  f.get("beta2", c.beta2);
  f.get("epsilon", c.epsilon);
  f.get("batch_size", c.batch_size);
  f.get("epochs", c.epochs);
  f.get("frames_per_video", c.frames_per_video);
  f.get("seed", c.seed);
  if (const json* a = f.child("ablation")) {
    Fields g(*a, f.path("ablation"));
    g.get("use_empty_bg", c.ablation.use_empty_bg);
    g.get("use_recent_bg", c.ablation.use_recent_bg);
    g.get("use_fpm", c.ablation.use_fpm);
    g.get("use_illumination_aug", c.ablation.use_illumination_aug);
    g.finish();
  }
  if (const json* a = f.child("augmentation")) {
    Fields g(*a, f.path("augmentation"));
    g.get("sigma_shared", c.augmentation.sigma_shared);
    g.get("sigma_channel", c.augmentation.sigma_channel);
    g.get("sigma_noise", c.augmentation.sigma_noise);
    g.get("crop_size", c.augmentation.crop_size);
    std::string topology = to_string(c.augmentation.topology);
    g.get("topology", topology);
    c.augmentation.topology = parse_topology(topology);
    g.finish();
  }
  if (const json* l = f.child("loss")) {
    Fields g(*l, f.path("loss"));
    g.get("smoothing", c.loss.smoothing);
    g.get("loss_masking", c.loss.loss_masking);
    g.finish();
  }
  f.finish();
  return c;
}

}  // namespace

json to_json(const NetworkConfig& c) {
  return {{"stage_widths", c.stage_widths}, {"convs_per_stage", c.convs_per_stage}, {"dropout_rate", c.dropout_rate}};
}

json to_json(const TrainConfig& c) {
  return {
      {"learning_rate", c.learning_rate},
      {"beta1", c.beta1},
      {"beta2", c.beta2},
      {"epsilon", c.epsilon},
      {"batch_size", c.batch_size},
      {"epochs", c.epochs},
      {"frames_per_video", c.frames_per_video},
      {"seed", c.seed},
      {"ablation",
       {{"use_empty_bg", c.ablation.use_empty_bg},
        {"use_recent_bg", c.ablation.use_recent_bg},
        {"use_fpm", c.ablation.use_fpm},
        {"use_illumination_aug", c.ablation.use_illumination_aug}}},
      {"augmentation",
       {{"sigma_shared", c.augmentation.sigma_shared},
        {"sigma_channel", c.augmentation.sigma_channel},
        {"sigma_noise", c.augmentation.sigma_noise},
        {"crop_size", c.augmentation.crop_size},
        {"topology", to_string(c.augmentation.topology)}}},
      {"loss", {{"smoothing", c.loss.smoothing}, {"loss_masking", c.loss.loss_masking}}},
  };
}

json to_json(const RunConfig& c) {
  return {
      {"dataset_root", c.dataset_root.string()},
      {"cache_root", c.cache_root.string()},
      {"output_root", c.output_root.string()},
      {"splits_manifest", c.splits_manifest.string()},
      {"split_id", c.split_id},
      {"method", c.method},
      {"empty_background", c.empty_background},
      {"empty_fg_fraction", c.empty_fg_fraction},
      {"threshold", c.threshold},
      {"train", to_json(c.train)},
      {"network", to_json(c.network)},
      {"segmenter",
       {{"kind", c.segmenter.kind},
        {"command", c.segmenter.command},
        {"classes", c.segmenter.classes},
        {"foreground_classes", c.segmenter.foreground_classes}}},
  };
}

NetworkConfig network_config_from_json(const json& j) { return read_network(j, "network"); }
TrainConfig train_config_from_json(const json& j) { return read_train(j, "train"); }

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  Fields f(j, "config");
  f.get("dataset_root", c.dataset_root);
  f.get("cache_root", c.cache_root);
  f.get("output_root", c.output_root);
  f.get("splits_manifest", c.splits_manifest);
  f.get("split_id", c.split_id);
  f.get("method", c.method);
  f.get("empty_background", c.empty_background);
  f.get("empty_fg_fraction", c.empty_fg_fraction);
  f.get("threshold", c.threshold);
  if (const json* t = f.child("train")) c.train = read_train(*t, "train");
  if (const json* n = f.child("network")) c.network = read_network(*n, "network");
  if (const json* s = f.child("segmenter")) {
    Fields g(*s, "segmenter");
    g.get("kind", c.segmenter.kind);
    g.get("command", c.segmenter.command);
    g.get("classes", c.segmenter.classes);
    g.get("foreground_classes", c.segmenter.foreground_classes);
    g.finish();
  }
  f.finish();
  return c;
}

void RunConfig::validate() const {
  if (split_id < 0 || split_id > 18) throw Error(Errc::InvalidConfig, fmt::format("split_id {} not in 1..18", split_id));
  if (!(threshold > 0 && threshold < 1)) throw Error(Errc::InvalidConfig, "threshold must lie in (0,1)");
  if (empty_background != "auto" && empty_background != "all_frames") {
    throw Error(Errc::InvalidConfig, "empty_background must be 'auto' or 'all_frames'");
  }
  if (!(empty_fg_fraction >= 0 && empty_fg_fraction <= 1)) {
    throw Error(Errc::InvalidConfig, "empty_fg_fraction must lie in [0,1]");
  }
  if (segmenter.kind != "stub" && segmenter.kind != "external") {
    throw Error(Errc::InvalidConfig, "segmenter.kind must be 'stub' or 'external'");
  }
  if (segmenter.kind == "external" && segmenter.command.empty()) {
    throw Error(Errc::InvalidConfig, "segmenter.command is required for an external segmenter");
  }
  if (method.empty() || method.find(',') != std::string::npos) {
    throw Error(Errc::InvalidConfig, "method must be non-empty and free of commas");
  }
  train.validate();
  network.validate();
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(Errc::InvalidConfig, "override '" + assignment + "' is not key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::size_t pos = 0;
  while (true) {
    const auto dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (part.empty()) throw Error(Errc::InvalidConfig, "override key '" + key + "' has an empty component");
    if (!node->is_object()) throw Error(Errc::InvalidConfig, "override key '" + key + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    pos = dot + 1;
  }
}

RunConfig resolve_config(const std::optional<fs::path>& file, const std::vector<std::string>& overrides) {
  json doc = to_json(RunConfig{});
  if (file) {
    std::ifstream in(*file);
    if (!in) throw Error(Errc::InvalidConfig, "cannot open config " + file->string());
    json loaded = json::parse(in, nullptr, false);
    if (loaded.is_discarded()) throw Error(Errc::InvalidConfig, file->string() + " is not valid JSON");
    if (!loaded.is_object()) throw Error(Errc::InvalidConfig, file->string() + ": expected an object");
    doc.merge_patch(loaded);
  }
  bool cache_overridden = false;
  for (const auto& o : overrides) cache_overridden |= o.rfind("cache_root=", 0) == 0;
  if (const char* env = std::getenv(kCacheRootEnv); env && *env && !cache_overridden) doc["cache_root"] = env;
  for (const auto& o : overrides) apply_override(doc, o);
  RunConfig c = run_config_from_json(doc);
  c.validate();
  return c;
}

}  // namespace bsuv
