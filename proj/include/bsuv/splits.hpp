#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bsuv/dataset.hpp"

namespace bsuv {

namespace fs = std::filesystem;

inline constexpr int kBundledSplitCount = 18;
inline constexpr int kBundledVideoCount = 53;

struct SplitSpec {
  int id = 0;
  std::vector<VideoId> train_videos;
  std::vector<VideoId> test_videos;
};

struct SplitTable {
  std::vector<SplitSpec> splits;  // ascending id

  /// Every video named anywhere in the manifest, sorted.
  std::vector<VideoId> universe;

  /// Throws InvalidConfig for an unknown id.
  const SplitSpec& at(int id) const;
};

// Manifest: one record per line, "split_id, category, video, role" with role
// one of train/test/unused. Blank lines and lines starting with '#' are
// skipped.

/// Parses and validates. Throws InvalidConfig on malformed records,
/// TrainTestOverlap, DuplicateTestAssignment, UncoveredVideo.
SplitTable parse_splits(std::istream& in, const std::string& source = "<manifest>");
SplitTable load_splits(const fs::path& manifest);

/// The table invariants on their own: per-split train/test disjointness and
/// every universe video in exactly one test set.
void validate_splits(const SplitTable& table);

/// Additionally requires the bundled shape: ids 1..18 and 53 videos.
void validate_bundled(const SplitTable& table);

/// data/splits.csv of the source tree.
fs::path bundled_manifest_path();

struct CoverageGap {
  int split_id = 0;
  std::string category;
  std::vector<VideoId> test_videos;  // test videos of that category
};

/// Test-video categories with no training video from the same category.
std::vector<CoverageGap> category_coverage_report(const SplitTable& table);

}  // namespace bsuv
