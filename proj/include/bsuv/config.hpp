#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsuv/network.hpp"
#include "bsuv/training.hpp"

namespace bsuv {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

inline constexpr const char* kCacheRootEnv = "BSUV_CACHE_ROOT";

struct SegmenterConfig {
  std::string kind = "stub";  // "stub" or "external"
  std::string command;        // external only
  int classes = 150;
  std::vector<int> foreground_classes;  // empty = ADE20K default set
  friend bool operator==(const SegmenterConfig&, const SegmenterConfig&) = default;
};

struct RunConfig {
  fs::path dataset_root;
  fs::path cache_root;
  fs::path output_root;
  fs::path splits_manifest;   // empty = bundled data/splits.csv
  int split_id = 0;           // 0 = not set
  std::string method = "BSUV-Net";
  /// "auto" (foreground-free frames among the first 100) or "all_frames".
  std::string empty_background = "auto";
  /// Frames whose FPM marks at most this pixel fraction as foreground count
  /// as foreground-free in automatic empty-background selection.
  double empty_fg_fraction = 0.001;
  double threshold = 0.5;
  TrainConfig train;
  NetworkConfig network;
  SegmenterConfig segmenter;

  /// Throws InvalidConfig.
  void validate() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

json to_json(const NetworkConfig& c);
json to_json(const TrainConfig& c);
json to_json(const RunConfig& c);

/// Strict readers: unknown keys and wrong types throw InvalidConfig.
/// Missing keys keep their defaults.
NetworkConfig network_config_from_json(const json& j);
TrainConfig train_config_from_json(const json& j);
RunConfig run_config_from_json(const json& j);

/// Applies "a.b.c=value" overrides to a JSON document. The value is parsed as
/// JSON when possible, otherwise taken as a string.
void apply_override(json& doc, const std::string& assignment);

/// defaults <- file (when given) <- overrides, then the cache-root
/// environment variable when set and no override names cache_root.
RunConfig resolve_config(const std::optional<fs::path>& file, const std::vector<std::string>& overrides);

}  // namespace bsuv
