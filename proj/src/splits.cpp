#include "bsuv/splits.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "bsuv/error.hpp"

#ifndef BSUV_DATA_DIR
#define BSUV_DATA_DIR "data"
#endif

namespace bsuv {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string name(const VideoId& v) { return v.category + "/" + v.video; }

}  // namespace

const SplitSpec& SplitTable::at(int id) const {
  for (const auto& s : splits) {
    if (s.id == id) return s;
  }
  throw Error(Errc::InvalidConfig, fmt::format("split {} not in the manifest", id));
}

void validate_splits(const SplitTable& table) {
  std::map<VideoId, std::vector<int>> test_of;
  for (const SplitSpec& s : table.splits) {
    const std::set<VideoId> train(s.train_videos.begin(), s.train_videos.end());
    for (const VideoId& v : s.test_videos) {
      if (train.count(v)) {
        throw Error(Errc::TrainTestOverlap, fmt::format("split {}: {} is both train and test", s.id, name(v)));
      }
      test_of[v].push_back(s.id);
    }
  }
  for (const VideoId& v : table.universe) {
    const auto it = test_of.find(v);
    if (it == test_of.end()) {
      throw Error(Errc::UncoveredVideo, fmt::format("{} is not in any test set", name(v)));
    }
    if (it->second.size() > 1) {
      throw Error(Errc::DuplicateTestAssignment,
                  fmt::format("{} is a test video in splits {}", name(v), fmt::join(it->second, ", ")));
    }
  }
}

void validate_bundled(const SplitTable& table) {
  validate_splits(table);
  std::vector<int> ids;
  for (const auto& s : table.splits) ids.push_back(s.id);
  std::vector<int> expected(kBundledSplitCount);
  for (int i = 0; i < kBundledSplitCount; ++i) expected[i] = i + 1;
  if (ids != expected) {
    throw Error(Errc::InvalidConfig, fmt::format("expected split ids 1..{}, got {}", kBundledSplitCount,
                                                 fmt::join(ids, ",")));
  }
  if (table.universe.size() != static_cast<std::size_t>(kBundledVideoCount)) {
    throw Error(Errc::UncoveredVideo,
                fmt::format("expected {} videos, manifest names {}", kBundledVideoCount, table.universe.size()));
  }
}

SplitTable parse_splits(std::istream& in, const std::string& source) {
  std::map<int, SplitSpec> by_id;
  std::map<std::pair<int, VideoId>, std::string> seen;
  std::set<VideoId> universe;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(t);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    const auto where = fmt::format("{}:{}", source, lineno);
    if (cells.size() != 4) throw Error(Errc::InvalidConfig, where + ": expected 'split_id, category, video, role'");
    int id = 0;
    try {
      std::size_t used = 0;
      id = std::stoi(cells[0], &used);
      if (used != cells[0].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(Errc::InvalidConfig, where + ": split id '" + cells[0] + "' is not an integer");
    }
    if (id < 1) throw Error(Errc::InvalidConfig, where + ": split id must be positive");
    if (cells[1].empty() || cells[2].empty()) throw Error(Errc::InvalidConfig, where + ": empty category or video");
    const VideoId v{cells[1], cells[2]};
    const std::string& role = cells[3];
    if (role != "train" && role != "test" && role != "unused") {
      throw Error(Errc::InvalidConfig, where + ": role '" + role + "' is not train/test/unused");
    }
    auto [it, fresh] = seen.emplace(std::make_pair(id, v), role);
    if (!fresh && it->second != role) {
      const bool clash = (role == "train" && it->second == "test") || (role == "test" && it->second == "train");
      throw Error(clash ? Errc::TrainTestOverlap : Errc::InvalidConfig,
                  fmt::format("{}: split {} lists {} as both {} and {}", where, id, name(v), it->second, role));
    }
    universe.insert(v);
    SplitSpec& s = by_id[id];
    s.id = id;
    if (!fresh) continue;
    if (role == "train") s.train_videos.push_back(v);
    if (role == "test") s.test_videos.push_back(v);
  }
  SplitTable table;
  for (auto& [id, s] : by_id) table.splits.push_back(std::move(s));
  table.universe.assign(universe.begin(), universe.end());
  validate_splits(table);
  return table;
}

SplitTable load_splits(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw Error(Errc::Io, "cannot open split manifest " + manifest.string());
  return parse_splits(in, manifest.string());
}

fs::path bundled_manifest_path() { return fs::path(BSUV_DATA_DIR) / "splits.csv"; }

std::vector<CoverageGap> category_coverage_report(const SplitTable& table) {
  std::vector<CoverageGap> gaps;
  for (const SplitSpec& s : table.splits) {
    std::set<std::string> trained;
    for (const auto& v : s.train_videos) trained.insert(v.category);
    std::map<std::string, std::vector<VideoId>> untrained;
    for (const auto& v : s.test_videos) {
      if (!trained.count(v.category)) untrained[v.category].push_back(v);
    }
    for (auto& [cat, vids] : untrained) gaps.push_back({s.id, cat, std::move(vids)});
  }
  return gaps;
}

}  // namespace bsuv
