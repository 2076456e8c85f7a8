#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "bsuv/checkpoint.hpp"
#include "bsuv/config.hpp"
#include "bsuv/evaluation.hpp"
#include "bsuv/pipeline.hpp"
#include "bsuv/splits.hpp"
#include "bsuv/training.hpp"

namespace bsuv::cli {

int exit_code_for(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidConfig:
      return kExitConfig;
    case Errc::NumericalFailure:
      return kExitNumerical;
    case Errc::DuplicateTestAssignment:
    case Errc::UncoveredVideo:
    case Errc::TrainTestOverlap:
    case Errc::InconsistentTable:
      return kExitValidation;
    default:
      return kExitData;
  }
}

namespace {

// Exclusive claim on an output directory for the lifetime of a command.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".lock") {
    fs::create_directories(dir);
    file_ = std::fopen(path_.string().c_str(), "wx");
    if (!file_) {
      throw Error(Errc::InvalidConfig,
                  fmt::format("{} exists; another command is writing there (delete it if stale)", path_.string()));
    }
  }
  ~DirLock() {
    std::fclose(file_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
  std::FILE* file_ = nullptr;
};

struct Common {
  std::string config_file;
  std::vector<std::string> overrides;
  std::vector<std::string> videos;  // category/video

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config_file, "JSON run configuration");
    cmd->add_option("-s,--set", overrides, "override, e.g. train.epochs=2 (repeatable)");
    cmd->add_option("--video", videos, "restrict to category/video (repeatable)");
  }

  RunConfig resolve() const {
    return resolve_config(config_file.empty() ? std::nullopt : std::optional<fs::path>(config_file), overrides);
  }
};

void require_dir(const fs::path& p, const char* key) {
  if (p.empty()) throw Error(Errc::InvalidConfig, fmt::format("{} is not set", key));
  if (!fs::is_directory(p)) throw Error(Errc::InvalidConfig, fmt::format("{} '{}' does not exist", key, p.string()));
}

void require_set(const fs::path& p, const char* key) {
  if (p.empty()) throw Error(Errc::InvalidConfig, fmt::format("{} is not set", key));
}

void save_resolved(const fs::path& dir, const RunConfig& cfg) {
  fs::create_directories(dir);
  std::ofstream out(dir / "resolved_config.json");
  out << to_json(cfg).dump(2) << "\n";
}

SplitTable manifest_for(const RunConfig& cfg) {
  if (cfg.splits_manifest.empty()) {
    SplitTable t = load_splits(bundled_manifest_path());
    validate_bundled(t);
    return t;
  }
  return load_splits(cfg.splits_manifest);
}

enum class Role { Train, Test, Both };

std::vector<VideoId> select_videos(const RunConfig& cfg, const std::vector<std::string>& explicit_videos, Role role) {
  std::vector<VideoId> out;
  if (!explicit_videos.empty()) {
    for (const auto& s : explicit_videos) {
      const auto slash = s.find('/');
      if (slash == std::string::npos || slash == 0 || slash + 1 == s.size()) {
        throw Error(Errc::InvalidConfig, "--video expects category/video, got '" + s + "'");
      }
      out.push_back({s.substr(0, slash), s.substr(slash + 1)});
    }
    return out;
  }
  if (cfg.split_id == 0) {
    if (role != Role::Both) throw Error(Errc::InvalidConfig, "split_id is required (or name videos with --video)");
    out = list_videos(cfg.dataset_root);
    if (out.empty()) throw Error(Errc::MissingFrame, "no videos under " + cfg.dataset_root.string());
    return out;
  }
  const SplitTable table = manifest_for(cfg);
  const SplitSpec& split = table.at(cfg.split_id);
  if (role != Role::Test) out.insert(out.end(), split.train_videos.begin(), split.train_videos.end());
  if (role != Role::Train) out.insert(out.end(), split.test_videos.begin(), split.test_videos.end());
  return out;
}

std::vector<VideoDescriptor> describe_all(const RunConfig& cfg, const std::vector<VideoId>& ids) {
  std::vector<VideoDescriptor> out;
  for (const auto& id : ids) out.push_back(describe_video(cfg.dataset_root, id));
  return out;
}

void prepare_cache(const RunConfig& cfg, const std::vector<VideoDescriptor>& videos, bool fpms) {
  auto segmenter = make_segmenter(cfg.segmenter);
  for (const auto& v : videos) {
    const CacheStats b = compute_backgrounds(cfg, v, *segmenter);
    std::cout << fmt::format("{}/{}: backgrounds {} written, {} cached\n", v.category, v.video, b.written, b.skipped);
    if (fpms) {
      const CacheStats f = compute_fpms(cfg, v, *segmenter);
      std::cout << fmt::format("{}/{}: fpm {} written, {} cached\n", v.category, v.video, f.written, f.skipped);
    }
  }
}

int cmd_backgrounds(const Common& common, bool fpm) {
  const RunConfig cfg = common.resolve();
  require_dir(cfg.dataset_root, "dataset_root");
  require_set(cfg.cache_root, "cache_root");
  const auto videos = describe_all(cfg, select_videos(cfg, common.videos, Role::Both));
  DirLock lock(cfg.cache_root);
  if (!fpm) {
    prepare_cache(cfg, videos, false);
    return kExitOk;
  }
  auto segmenter = make_segmenter(cfg.segmenter);
  for (const auto& v : videos) {
    const CacheStats f = compute_fpms(cfg, v, *segmenter);
    std::cout << fmt::format("{}/{}: fpm {} written, {} cached\n", v.category, v.video, f.written, f.skipped);
  }
  return kExitOk;
}

TrainResult run_training(const RunConfig& cfg, const std::vector<VideoDescriptor>& videos, const fs::path& out_dir) {
  prepare_cache(cfg, videos, true);
  const CachedSource source = CachedSource::for_training(cfg, videos);
  const auto per_epoch = steps_per_epoch(source.size(), cfg.train.batch_size);
  std::cout << fmt::format("training on {} frames from {} videos, {} steps per epoch\n", source.size(), videos.size(),
                           per_epoch);
  TrainOptions options;
  options.output_dir = out_dir;
  options.on_step = [per_epoch](const StepRecord& r) {
    if (r.step % per_epoch == 0) std::cout << fmt::format("epoch {} step {} loss {:.5f}\n", r.epoch, r.step, r.loss);
  };
  return train(source, cfg.train, cfg.network, options);
}

int cmd_train(const Common& common) {
  const RunConfig cfg = common.resolve();
  require_dir(cfg.dataset_root, "dataset_root");
  require_set(cfg.cache_root, "cache_root");
  require_set(cfg.output_root, "output_root");
  const fs::path out = cfg.output_root / "train";
  DirLock lock(out);
  save_resolved(out, cfg);
  const auto videos = describe_all(cfg, select_videos(cfg, common.videos, Role::Train));
  run_training(cfg, videos, out);
  std::cout << "checkpoints in " << out.string() << "\n";
  return kExitOk;
}

int infer_all(const RunConfig& cfg, const SegmentationNet& net, const std::vector<VideoDescriptor>& videos,
              const fs::path& masks) {
  prepare_cache(cfg, videos, true);
  int total = 0;
  for (const auto& v : videos) {
    const int n = infer_video(net, cfg, v, masks);
    std::cout << fmt::format("{}/{}: {} masks\n", v.category, v.video, n);
    total += n;
  }
  return total;
}

int cmd_infer(const Common& common, const std::string& checkpoint) {
  const RunConfig cfg = common.resolve();
  require_dir(cfg.dataset_root, "dataset_root");
  require_set(cfg.cache_root, "cache_root");
  require_set(cfg.output_root, "output_root");
  const fs::path ckpt = checkpoint.empty() ? cfg.output_root / "train" / "last.ckpt" : fs::path(checkpoint);
  if (!fs::exists(ckpt)) throw Error(Errc::InvalidConfig, "checkpoint " + ckpt.string() + " does not exist");
  const Checkpoint loaded = load_checkpoint(ckpt);
  const fs::path masks = cfg.output_root / "masks";
  DirLock lock(masks);
  save_resolved(masks, cfg);
  const auto videos = describe_all(cfg, select_videos(cfg, common.videos, Role::Test));
  infer_all(cfg, loaded.net, videos, masks);
  return kExitOk;
}

void print_summary(const EvaluationReport& report) {
  for (const auto& [cat, m] : report.summary.per_category) {
    std::cout << fmt::format("{:<28} F1 {:.4f}  Pr {:.4f}  Re {:.4f}\n", cat, m[Metric::F1], m[Metric::Pr],
                             m[Metric::Re]);
  }
  const MetricVector& o = report.summary.overall;
  std::cout << fmt::format("{:<28} F1 {:.4f}  Pr {:.4f}  Re {:.4f}\n", "overall", o[Metric::F1], o[Metric::Pr],
                           o[Metric::Re]);
}

int cmd_eval(const Common& common, const std::string& masks_arg) {
  const RunConfig cfg = common.resolve();
  require_dir(cfg.dataset_root, "dataset_root");
  require_set(cfg.output_root, "output_root");
  const fs::path masks = masks_arg.empty() ? cfg.output_root / "masks" : fs::path(masks_arg);
  require_dir(masks, "masks");
  const fs::path out = cfg.output_root / "report";
  DirLock lock(out);
  save_resolved(out, cfg);
  const auto ids = select_videos(cfg, common.videos, Role::Test);
  const EvaluationReport report = evaluate_run(masks, cfg.dataset_root, ids, cfg.method);
  write_report(out, report);
  print_summary(report);
  return kExitOk;
}

int cmd_rank(const std::vector<std::string>& reports, const std::string& out_path) {
  RankingInput table;
  for (const auto& r : reports) {
    fs::path p = r;
    if (fs::is_directory(p)) p /= "per_category.csv";
    for (auto& [method, cats] : read_category_report(p)) {
      if (table.count(method)) throw Error(Errc::InconsistentTable, "method '" + method + "' appears twice");
      table[method] = std::move(cats);
    }
  }
  const auto scores = rankings(table);
  const fs::path out = out_path;
  write_ranking(out, scores);
  write_f1_plot(out.parent_path() / (out.stem().string() + "_f1.png"), table);
  for (const auto& [method, s] : scores) std::cout << fmt::format("{:<20} R {:.4f}  R_cat {:.4f}\n", method, s.r, s.r_cat);
  return kExitOk;
}

std::vector<AblationFlags> default_ablation_rows() {
  // Current frame alone, each background alone, both, then augmentation,
  // FPM, and both on top.
  return {
      {false, false, false, false}, {true, false, false, false}, {false, true, false, false},
      {true, true, false, false},   {true, true, false, true},   {true, true, true, false},
      {true, true, true, true},
  };
}

AblationFlags parse_ablation_label(const std::string& label) {
  AblationFlags f{false, false, false, false};
  std::stringstream ss(label);
  std::string part;
  bool has_current = false;
  while (std::getline(ss, part, '+')) {
    if (part == "C") has_current = true;
    else if (part == "E") f.use_empty_bg = true;
    else if (part == "R") f.use_recent_bg = true;
    else if (part == "FPM") f.use_fpm = true;
    else if (part == "aug") f.use_illumination_aug = true;
    else throw Error(Errc::InvalidConfig, "unknown ablation component '" + part + "' in '" + label + "'");
  }
  if (!has_current) throw Error(Errc::InvalidConfig, "ablation row '" + label + "' must start with C");
  return f;
}

int cmd_ablate(const Common& common, const std::vector<std::string>& rows_arg) {
  const RunConfig base = common.resolve();
  require_dir(base.dataset_root, "dataset_root");
  require_set(base.cache_root, "cache_root");
  require_set(base.output_root, "output_root");
  std::vector<AblationFlags> rows;
  for (const auto& r : rows_arg) rows.push_back(parse_ablation_label(r));
  if (rows.empty()) rows = default_ablation_rows();

  const fs::path root = base.output_root / "ablation";
  DirLock lock(root);
  save_resolved(root, base);
  const auto train_videos = describe_all(base, select_videos(base, {}, Role::Train));
  const auto test_ids = select_videos(base, {}, Role::Test);
  const auto test_videos = describe_all(base, test_ids);

  std::ofstream table(root / "ablation.csv");
  table << "row,current,empty_bg,recent_bg,data_aug,fpm,Pr,Re,F1\n";
  for (const AblationFlags& flags : rows) {
    RunConfig cfg = base;
    cfg.train.ablation = flags;
    cfg.method = flags.label();
    const fs::path dir = root / flags.label();
    save_resolved(dir, cfg);
    std::cout << "== " << flags.label() << "\n";
    const TrainResult trained = run_training(cfg, train_videos, dir / "train");
    infer_all(cfg, trained.net, test_videos, dir / "masks");
    const EvaluationReport report = evaluate_run(dir / "masks", cfg.dataset_root, test_ids, cfg.method);
    write_report(dir / "report", report);
    const MetricVector& o = report.summary.overall;
    table << fmt::format("{},1,{:d},{:d},{:d},{:d},{:.6f},{:.6f},{:.6f}\n", flags.label(), flags.use_empty_bg,
                         flags.use_recent_bg, flags.use_illumination_aug, flags.use_fpm, o[Metric::Pr], o[Metric::Re],
                         o[Metric::F1])
          << std::flush;
  }
  std::cout << "comparison table in " << (root / "ablation.csv").string() << "\n";
  return kExitOk;
}

int cmd_splits_validate(const std::string& manifest_arg) {
  const bool bundled = manifest_arg.empty();
  const fs::path manifest = bundled ? bundled_manifest_path() : fs::path(manifest_arg);
  const SplitTable table = load_splits(manifest);
  if (bundled) validate_bundled(table);
  std::cout << fmt::format("{} splits, {} videos covered\n", table.splits.size(), table.universe.size());
  for (const CoverageGap& g : category_coverage_report(table)) {
    std::cout << fmt::format("split {}: no training video from category {} ({} test videos)\n", g.split_id,
                             g.category, g.test_videos.size());
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Background subtraction with two-timescale references and semantic FPMs"};
  app.require_subcommand(1);

  Common bg, fpm, train_opts, infer_opts, eval_opts, ablate_opts;
  auto* c_bg = app.add_subcommand("backgrounds", "cache empty and recent background frames");
  bg.attach(c_bg);
  auto* c_fpm = app.add_subcommand("fpm", "cache foreground probability maps");
  fpm.attach(c_fpm);
  auto* c_train = app.add_subcommand("train", "train on the training videos of a split");
  train_opts.attach(c_train);
  std::string checkpoint;
  auto* c_infer = app.add_subcommand("infer", "write binary masks for the test videos");
  infer_opts.attach(c_infer);
  c_infer->add_option("--checkpoint", checkpoint, "defaults to <output_root>/train/last.ckpt");
  std::string masks;
  auto* c_eval = app.add_subcommand("eval", "score masks against ground truth");
  eval_opts.attach(c_eval);
  c_eval->add_option("--masks", masks, "defaults to <output_root>/masks");
  std::vector<std::string> reports;
  std::string rank_out;
  auto* c_rank = app.add_subcommand("rank", "rank methods from per_category.csv reports");
  c_rank->add_option("reports", reports, "per_category.csv files or report directories")->required();
  c_rank->add_option("-o,--out", rank_out, "ranking CSV path")->required();
  std::vector<std::string> rows;
  auto* c_ablate = app.add_subcommand("ablate", "train and score each input-slot combination");
  ablate_opts.attach(c_ablate);
  c_ablate->add_option("--rows", rows, "rows such as C, C+E, C+E+R+aug+FPM (default: all seven)");
  auto* c_splits = app.add_subcommand("splits", "split manifest tools");
  c_splits->require_subcommand(1);
  std::string manifest;
  auto* c_validate = c_splits->add_subcommand("validate", "check the split invariants");
  c_validate->add_option("manifest", manifest, "defaults to the bundled manifest");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (c_bg->parsed()) return cmd_backgrounds(bg, false);
    if (c_fpm->parsed()) return cmd_backgrounds(fpm, true);
    if (c_train->parsed()) return cmd_train(train_opts);
    if (c_infer->parsed()) return cmd_infer(infer_opts, checkpoint);
    if (c_eval->parsed()) return cmd_eval(eval_opts, masks);
    if (c_rank->parsed()) return cmd_rank(reports, rank_out);
    if (c_ablate->parsed()) return cmd_ablate(ablate_opts, rows);
    if (c_validate->parsed()) return cmd_splits_validate(manifest);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitConfig;
}

}  // namespace bsuv::cli
