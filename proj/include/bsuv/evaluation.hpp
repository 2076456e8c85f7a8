#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bsuv/dataset.hpp"
#include "bsuv/kernels/confusion.hpp"
#include "bsuv/types.hpp"

namespace bsuv {

namespace fs = std::filesystem;

enum class Metric { Re, Sp, FPR, FNR, PWC, Pr, F1 };
inline constexpr int kMetricCount = 7;
inline constexpr std::array<Metric, kMetricCount> kAllMetrics{Metric::Re,  Metric::Sp, Metric::FPR, Metric::FNR,
                                                              Metric::PWC, Metric::Pr, Metric::F1};

std::string_view metric_name(Metric m) noexcept;
bool higher_is_better(Metric m) noexcept;

/// The seven scores plus, per score, whether it takes part in averaging.
/// A score with a zero denominator reads 0 and is marked non-aggregable.
struct MetricVector {
  std::array<double, kMetricCount> value{};
  std::array<bool, kMetricCount> aggregable{};

  double operator[](Metric m) const { return value[static_cast<int>(m)]; }
  bool has(Metric m) const { return aggregable[static_cast<int>(m)]; }
  void set(Metric m, double v, bool agg = true) {
    value[static_cast<int>(m)] = v;
    aggregable[static_cast<int>(m)] = agg;
  }
  friend bool operator==(const MetricVector&, const MetricVector&) = default;
};

/// Throws ShapeMismatch.
ConfusionCounts confusion(const BinaryMask& pred, const LabelMap& gt);

/// Throws NoEvaluatedPixels.
MetricVector metrics(const ConfusionCounts& c);

struct VideoMetrics {
  VideoId id;
  MetricVector metrics;
};

struct Aggregate {
  std::map<std::string, MetricVector> per_category;
  MetricVector overall;
};

/// Mean over videos within a category, then mean over categories; each
/// score averages only the entries that mark it aggregable. Throws
/// EmptyCategory on empty input.
Aggregate aggregate(std::span<const VideoMetrics> per_video);
MetricVector aggregate_categories(const std::map<std::string, MetricVector>& per_category);

/// method -> category -> scores.
using RankingInput = std::map<std::string, std::map<std::string, MetricVector>>;

struct RankScores {
  double r = 0.0;      // mean over metrics of the rank on overall scores
  double r_cat = 0.0;  // mean over categories of the mean-over-metrics rank
};

/// Average ranks (1 = best, ties share the mean rank). Throws
/// InconsistentTable with fewer than two methods or differing category sets.
std::map<std::string, RankScores> rankings(const RankingInput& table);

/// Average ranks of `values` where larger is better when `higher` is set.
std::vector<double> average_ranks(std::span<const double> values, bool higher);

struct VideoReport {
  VideoId id;
  ConfusionCounts counts;
  MetricVector metrics;
  int frames = 0;
};

struct EvaluationReport {
  std::string method;
  std::vector<VideoReport> videos;
  Aggregate summary;
};

/// Scores <masks_dir>/<category>/<video>/bin%06d.png against the ground truth
/// for every frame in each video's temporal ROI. Counts accumulate per video
/// before metrics are taken. Throws MissingMask, ShapeMismatch,
/// MissingGroundTruth.
EvaluationReport evaluate_run(const fs::path& masks_dir, const fs::path& dataset_root, std::span<const VideoId> videos,
                              const std::string& method);

fs::path mask_path(const fs::path& masks_dir, const VideoId& id, int frame);

/// per_video.csv, per_category.csv, overall.csv and f1_by_category.png.
void write_report(const fs::path& dir, const EvaluationReport& report);

/// Reads a per_category.csv back into method -> category -> scores.
RankingInput read_category_report(const fs::path& csv);

/// ranking.csv (method, R, R_cat), headed by a "# local ranking" note.
void write_ranking(const fs::path& path, const std::map<std::string, RankScores>& scores);

/// Bar chart of per-category F1, one bar group per method.
void write_f1_plot(const fs::path& path, const RankingInput& table);

}  // namespace bsuv
