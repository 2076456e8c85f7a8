#include "bsuv/evaluation.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "bsuv/error.hpp"
#include "bsuv/image_io.hpp"

namespace bsuv {

std::string_view metric_name(Metric m) noexcept {
  switch (m) {
    case Metric::Re: return "Re";
    case Metric::Sp: return "Sp";
    case Metric::FPR: return "FPR";
    case Metric::FNR: return "FNR";
    case Metric::PWC: return "PWC";
    case Metric::Pr: return "Pr";
    case Metric::F1: return "F1";
  }
  return "?";
}

bool higher_is_better(Metric m) noexcept {
  return m == Metric::Re || m == Metric::Sp || m == Metric::Pr || m == Metric::F1;
}

ConfusionCounts confusion(const BinaryMask& pred, const LabelMap& gt) {
  if (pred.shape() != gt.shape()) {
    throw Error(Errc::ShapeMismatch,
                fmt::format("mask {} vs ground truth {}", to_string(pred.shape()), to_string(gt.shape())));
  }
  return kernels::count_confusion(pred.data(), gt.data());
}

MetricVector metrics(const ConfusionCounts& c) {
  if (c.evaluated() == 0) throw Error(Errc::NoEvaluatedPixels, "every pixel is ignored");
  const auto ratio = [](std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  const std::uint64_t pos = c.tp + c.fn;
  const std::uint64_t neg = c.tn + c.fp;
  const std::uint64_t reported = c.tp + c.fp;
  const bool has_pos = pos > 0, has_neg = neg > 0;

  MetricVector m;
  const double re = ratio(c.tp, pos);
  const double pr = ratio(c.tp, reported);
  m.set(Metric::Re, re, has_pos);
  m.set(Metric::FNR, ratio(c.fn, pos), has_pos);
  m.set(Metric::Sp, ratio(c.tn, neg), has_neg);
  m.set(Metric::FPR, ratio(c.fp, neg), has_neg);
  m.set(Metric::PWC, 100.0 * static_cast<double>(c.fn + c.fp) / static_cast<double>(c.evaluated()));
  m.set(Metric::Pr, pr, has_pos);
  // 2 Pr Re / (Pr + Re) reduces to 2 TP / (2 TP + FP + FN) on counts.
  m.set(Metric::F1, ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn), has_pos);
  return m;
}

namespace {

MetricVector mean_of(const std::vector<const MetricVector*>& items) {
  MetricVector out;
  for (int k = 0; k < kMetricCount; ++k) {
    double sum = 0.0;
    int n = 0;
    for (const MetricVector* v : items) {
      if (!v->aggregable[k]) continue;
      sum += v->value[k];
      ++n;
    }
    out.value[k] = n ? sum / n : 0.0;
    out.aggregable[k] = n > 0;
  }
  return out;
}

}  // namespace

MetricVector aggregate_categories(const std::map<std::string, MetricVector>& per_category) {
  if (per_category.empty()) throw Error(Errc::EmptyCategory, "no categories to aggregate");
  std::vector<const MetricVector*> items;
  for (const auto& [name, v] : per_category) items.push_back(&v);
  return mean_of(items);
}

Aggregate aggregate(std::span<const VideoMetrics> per_video) {
  if (per_video.empty()) throw Error(Errc::EmptyCategory, "no videos to aggregate");
  std::map<std::string, std::vector<const MetricVector*>> groups;
  for (const VideoMetrics& v : per_video) groups[v.id.category].push_back(&v.metrics);
  Aggregate out;
  for (const auto& [cat, items] : groups) out.per_category[cat] = mean_of(items);
  out.overall = aggregate_categories(out.per_category);
  return out;
}

std::vector<double> average_ranks(std::span<const double> values, bool higher) {
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::size_t better = 0, equal = 0;
    for (double other : values) {
      if (other == values[i]) {
        ++equal;
      } else if (higher ? other > values[i] : other < values[i]) {
        ++better;
      }
    }
    // Tied entries share the mean of the positions better+1 .. better+equal.
    ranks[i] = static_cast<double>(better) + (static_cast<double>(equal) + 1.0) / 2.0;
  }
  return ranks;
}

std::map<std::string, RankScores> rankings(const RankingInput& table) {
  if (table.size() < 2) throw Error(Errc::InconsistentTable, "ranking needs at least two methods");
  std::set<std::string> categories;
  for (const auto& [cat, v] : table.begin()->second) categories.insert(cat);
  if (categories.empty()) throw Error(Errc::InconsistentTable, "methods have no categories");
  for (const auto& [method, cats] : table) {
    std::set<std::string> mine;
    for (const auto& [cat, v] : cats) mine.insert(cat);
    if (mine != categories) {
      throw Error(Errc::InconsistentTable, fmt::format("method '{}' covers a different category set", method));
    }
  }

  std::vector<std::string> methods;
  for (const auto& [m, v] : table) methods.push_back(m);
  const std::size_t n = methods.size();

  std::vector<double> r_cat(n, 0.0), r(n, 0.0);
  std::vector<double> column(n);
  for (const std::string& cat : categories) {
    for (Metric metric : kAllMetrics) {
      for (std::size_t i = 0; i < n; ++i) column[i] = table.at(methods[i]).at(cat)[metric];
      const auto ranks = average_ranks(column, higher_is_better(metric));
      for (std::size_t i = 0; i < n; ++i) r_cat[i] += ranks[i];
    }
  }
  std::vector<MetricVector> overall;
  for (const auto& m : methods) overall.push_back(aggregate_categories(table.at(m)));
  for (Metric metric : kAllMetrics) {
    for (std::size_t i = 0; i < n; ++i) column[i] = overall[i][metric];
    const auto ranks = average_ranks(column, higher_is_better(metric));
    for (std::size_t i = 0; i < n; ++i) r[i] += ranks[i];
  }

  std::map<std::string, RankScores> out;
  for (std::size_t i = 0; i < n; ++i) {
    out[methods[i]] = {r[i] / kMetricCount, r_cat[i] / (kMetricCount * static_cast<double>(categories.size()))};
  }
  return out;
}

fs::path mask_path(const fs::path& masks_dir, const VideoId& id, int frame) {
  return masks_dir / id.category / id.video / fmt::format("bin{:06d}.png", frame);
}

EvaluationReport evaluate_run(const fs::path& masks_dir, const fs::path& dataset_root, std::span<const VideoId> videos,
                              const std::string& method) {
  EvaluationReport report;
  report.method = method;
  for (const VideoId& id : videos) {
    const VideoDescriptor video = describe_video(dataset_root, id);
    const int first = video.temporal_roi.first;
    const int count = video.temporal_roi.last - first + 1;
    std::vector<ConfusionCounts> per_frame(static_cast<std::size_t>(count));
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < count; ++i) {
      try {
        const int t = first + i;
        const fs::path mp = mask_path(masks_dir, id, t);
        if (!fs::exists(mp)) {
          throw Error(Errc::MissingMask, fmt::format("{}/{} frame {}: {}", id.category, id.video, t, mp.string()));
        }
        const BinaryMask pred = decode_mask(read_gray8(mp));
        const LabelMap gt = load_ground_truth(dataset_root, video, t);
        if (pred.shape() != gt.shape()) {
          throw Error(Errc::ShapeMismatch, fmt::format("{}/{} frame {}: mask {} vs ground truth {}", id.category,
                                                       id.video, t, to_string(pred.shape()), to_string(gt.shape())));
        }
        per_frame[static_cast<std::size_t>(i)] = confusion(pred, gt);
      } catch (...) {
#pragma omp critical(bsuv_eval_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    VideoReport vr{id, {}, {}, count};
    for (const auto& c : per_frame) vr.counts += c;
    vr.metrics = metrics(vr.counts);
    report.videos.push_back(std::move(vr));
  }
  std::vector<VideoMetrics> vm;
  for (const auto& v : report.videos) vm.push_back({v.id, v.metrics});
  report.summary = aggregate(vm);
  return report;
}

namespace {

constexpr const char* kHeader = "method,category,video,Re,Sp,FPR,FNR,PWC,Pr,F1";

std::string row(const std::string& method, const std::string& category, const std::string& video,
                const MetricVector& m) {
  std::string s = fmt::format("{},{},{}", method, category, video);
  for (int k = 0; k < kMetricCount; ++k) {
    s += m.aggregable[k] ? fmt::format(",{:.10g}", m.value[k]) : std::string(",");
  }
  return s + "\n";
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

void write_report(const fs::path& dir, const EvaluationReport& report) {
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "per_video.csv");
    out << kHeader << "\n";
    for (const auto& v : report.videos) out << row(report.method, v.id.category, v.id.video, v.metrics);
  }
  {
    auto out = open_out(dir / "per_category.csv");
    out << kHeader << "\n";
    for (const auto& [cat, m] : report.summary.per_category) out << row(report.method, cat, "", m);
  }
  {
    auto out = open_out(dir / "overall.csv");
    out << kHeader << "\n" << row(report.method, "overall", "", report.summary.overall);
  }
  RankingInput table;
  table[report.method] = report.summary.per_category;
  write_f1_plot(dir / "f1_by_category.png", table);
}

RankingInput read_category_report(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw Error(Errc::Io, "cannot open " + csv.string());
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw Error(Errc::InconsistentTable, csv.string() + ": unexpected header");
  }
  RankingInput table;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 3 + kMetricCount) {
      throw Error(Errc::InconsistentTable, fmt::format("{}:{}: expected {} cells", csv.string(), lineno, 3 + kMetricCount));
    }
    MetricVector m;
    for (int k = 0; k < kMetricCount; ++k) {
      const std::string& c = cells[3 + static_cast<std::size_t>(k)];
      if (c.empty()) continue;
      try {
        m.set(kAllMetrics[k], std::stod(c));
      } catch (const std::exception&) {
        throw Error(Errc::InconsistentTable, fmt::format("{}:{}: bad number '{}'", csv.string(), lineno, c));
      }
    }
    table[cells[0]][cells[1]] = m;
  }
  return table;
}

void write_ranking(const fs::path& path, const std::map<std::string, RankScores>& scores) {
  auto out = open_out(path);
  out << "# local ranking: average ranks over Re,Sp,FPR,FNR,PWC,Pr,F1; ties share the mean rank\n";
  out << "method,R,R_cat\n";
  std::vector<std::pair<std::string, RankScores>> rows(scores.begin(), scores.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second.r < b.second.r; });
  for (const auto& [method, s] : rows) out << fmt::format("{},{:.10g},{:.10g}\n", method, s.r, s.r_cat);
}

void write_f1_plot(const fs::path& path, const RankingInput& table) {
  std::set<std::string> cats;
  for (const auto& [m, c] : table)
    for (const auto& [name, v] : c) cats.insert(name);
  const int n_cat = std::max<int>(1, static_cast<int>(cats.size()));
  const int n_method = std::max<int>(1, static_cast<int>(table.size()));

  const int left = 50, right = 20, top = 40, bottom = 110;
  const int group = std::max(40, 12 * n_method + 16);
  const int width = std::max(320, left + right + group * n_cat);
  const int height = 420;
  const int plot_h = height - top - bottom;
  cv::Mat img(height, width, CV_8UC3, cv::Scalar(255, 255, 255));

  const cv::Scalar ink(40, 40, 40);
  cv::putText(img, "F1 by category", {left, 25}, cv::FONT_HERSHEY_SIMPLEX, 0.6, ink, 1, cv::LINE_AA);
  for (int tick = 0; tick <= 4; ++tick) {
    const int y = top + plot_h - plot_h * tick / 4;
    cv::line(img, {left, y}, {width - right, y}, cv::Scalar(220, 220, 220));
    cv::putText(img, fmt::format("{:.2f}", tick / 4.0), {5, y + 4}, cv::FONT_HERSHEY_SIMPLEX, 0.4, ink, 1,
                cv::LINE_AA);
  }
  const cv::Scalar palette[] = {{180, 119, 31}, {14, 127, 255}, {44, 160, 44}, {40, 39, 214}, {189, 103, 148}};

  int ci = 0;
  for (const std::string& cat : cats) {
    const int x0 = left + ci * group + 8;
    int mi = 0;
    for (const auto& [method, per_cat] : table) {
      const auto it = per_cat.find(cat);
      const double f1 = it == per_cat.end() ? 0.0 : std::clamp(it->second[Metric::F1], 0.0, 1.0);
      const int bar_h = static_cast<int>(f1 * plot_h);
      const int x = x0 + mi * 12;
      cv::rectangle(img, {x, top + plot_h - bar_h}, {x + 10, top + plot_h}, palette[mi % 5], cv::FILLED);
      ++mi;
    }
    // Vertical label: draw horizontally then rotate into place.
    cv::Mat label(16, bottom - 10, CV_8UC3, cv::Scalar(255, 255, 255));
    cv::putText(label, cat.substr(0, 16), {0, 12}, cv::FONT_HERSHEY_SIMPLEX, 0.35, ink, 1, cv::LINE_AA);
    cv::Mat rotated;
    cv::rotate(label, rotated, cv::ROTATE_90_COUNTERCLOCKWISE);
    const int lx = std::min(x0, width - rotated.cols);
    rotated.copyTo(img(cv::Rect(lx, top + plot_h + 5, rotated.cols, rotated.rows)));
    ++ci;
  }
  int mi = 0;
  for (const auto& [method, per_cat] : table) {
    const int y = 45 + 14 * mi;
    cv::rectangle(img, {width - right - 110, y - 8}, {width - right - 100, y}, palette[mi % 5], cv::FILLED);
    cv::putText(img, method.substr(0, 14), {width - right - 95, y}, cv::FONT_HERSHEY_SIMPLEX, 0.35, ink, 1,
                cv::LINE_AA);
    ++mi;
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), img)) throw Error(Errc::Io, "cannot write " + path.string());
}

}  // namespace bsuv
