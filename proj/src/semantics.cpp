#include "bsuv/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>

#include <fmt/format.h>
#include <unistd.h>

#include "bsuv/error.hpp"
#include "bsuv/image_io.hpp"

namespace bsuv {

ClassProbabilityField::ClassProbabilityField(int height, int width, int classes, std::vector<double> probs)
    : height_(height), width_(width), classes_(classes), probs_(std::move(probs)) {
  if (height < 1 || width < 1 || classes < 2) throw Error(Errc::ShapeMismatch, "class field dimensions");
  const std::size_t pixels = static_cast<std::size_t>(height) * width;
  if (probs_.size() != pixels * classes) throw Error(Errc::ShapeMismatch, "class field size");
  for (std::size_t p = 0; p < pixels; ++p) {
    double sum = 0.0;
    for (int k = 0; k < classes; ++k) {
      const double v = probs_[p * classes + k];
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(Errc::NormalizationViolation, fmt::format("probability {} at pixel {}", v, p));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kNormTolerance) {
      throw Error(Errc::NormalizationViolation, fmt::format("pixel {} sums to {}", p, sum));
    }
  }
}

ForegroundClassSet::ForegroundClassSet(std::vector<int> indices, int classes)
    : indices_(std::move(indices)), classes_(classes) {
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  if (indices_.empty() || static_cast<int>(indices_.size()) >= classes) {
    throw Error(Errc::InvalidConfig, "foreground class set must be a non-empty proper subset");
  }
  if (indices_.front() < 0 || indices_.back() >= classes) {
    throw Error(Errc::IndexOutOfRange, fmt::format("foreground class index outside [0, {})", classes));
  }
}

ForegroundClassSet ForegroundClassSet::complement() const {
  std::vector<int> rest;
  for (int k = 0; k < classes_; ++k) {
    if (!std::binary_search(indices_.begin(), indices_.end(), k)) rest.push_back(k);
  }
  return ForegroundClassSet(std::move(rest), classes_);
}

ForegroundClassSet ForegroundClassSet::ade20k_default() {
  return ForegroundClassSet({12, 20, 39, 41, 67, 76, 80, 83, 98, 102, 115, 127}, kAde20kClasses);
}

ProbabilityMap compute_fpm(const ClassProbabilityField& field, const ForegroundClassSet& fg) {
  if (fg.indices().back() >= field.classes()) {
    throw Error(Errc::IndexOutOfRange,
                fmt::format("class {} but the field has {} classes", fg.indices().back(), field.classes()));
  }
  const std::size_t pixels = static_cast<std::size_t>(field.height()) * field.width();
  const auto probs = field.data();
  const auto k = static_cast<std::size_t>(field.classes());
  std::vector<double> out(pixels);
  for (std::size_t p = 0; p < pixels; ++p) {
    double s = 0.0;
    for (int c : fg.indices()) s += probs[p * k + static_cast<std::size_t>(c)];
    out[p] = std::clamp(s, 0.0, 1.0);
  }
  return ProbabilityMap(field.height(), field.width(), std::move(out));
}

BinaryMask fpm_threshold_bgs(const ProbabilityMap& fpm, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw Error(Errc::InvalidConfig, "threshold must lie in (0,1)");
  std::vector<std::uint8_t> v(fpm.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fpm[i] > theta ? 1 : 0;
  return BinaryMask(fpm.height(), fpm.width(), std::move(v));
}

StubSegmenter::StubSegmenter(int classes, int person_class) : classes_(classes), person_(person_class) {
  if (classes < 2 || person_class < 0 || person_class >= classes) {
    throw Error(Errc::InvalidConfig, "stub segmenter class configuration");
  }
}

ClassProbabilityField StubSegmenter::predict(const ColorFrame& frame) {
  const std::size_t pixels = static_cast<std::size_t>(frame.height()) * frame.width();
  const auto k = static_cast<std::size_t>(classes_);
  std::vector<double> probs(pixels * k);
  const auto rgb = frame.data();
  for (std::size_t p = 0; p < pixels; ++p) {
    const double lum = (rgb[p * 3] + rgb[p * 3 + 1] + rgb[p * 3 + 2]) / 3.0;
    const double rest = (1.0 - lum) / static_cast<double>(classes_ - 1);
    std::fill_n(probs.begin() + static_cast<std::ptrdiff_t>(p * k), k, rest);
    probs[p * k + static_cast<std::size_t>(person_)] = lum;
  }
  return ClassProbabilityField(frame.height(), frame.width(), classes_, std::move(probs));
}

ExternalSegmenter::ExternalSegmenter(std::string command, int classes)
    : command_(std::move(command)), classes_(classes) {
  if (classes < 2) throw Error(Errc::InvalidConfig, "external segmenter needs at least 2 classes");
}

namespace {

std::uint32_t read_u32_le(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

}  // namespace

ClassProbabilityField ExternalSegmenter::predict(const ColorFrame& frame) {
  std::lock_guard lock(mutex_);
  if (command_.empty()) throw Error(Errc::SegmenterUnavailable, "no segmenter command configured");

  const fs::path dir = fs::temp_directory_path() / fmt::format("bsuv-seg-{}", ::getpid());
  fs::create_directories(dir);
  const fs::path in_png = dir / fmt::format("frame{}.png", calls_);
  const fs::path out_bin = dir / fmt::format("probs{}.bin", calls_);
  ++calls_;
  write_color8(in_png, frame);

  const std::string cmd = fmt::format("{} {} {}", command_, shell_quote(in_png.string()), shell_quote(out_bin.string()));
  const int status = std::system(cmd.c_str());
  fs::remove(in_png);
  if (status != 0 || !fs::exists(out_bin)) {
    fs::remove(out_bin);
    throw Error(Errc::SegmenterUnavailable, fmt::format("'{}' failed with status {}", command_, status));
  }

  std::ifstream in(out_bin, std::ios::binary);
  const auto h = static_cast<int>(read_u32_le(in));
  const auto w = static_cast<int>(read_u32_le(in));
  const auto k = static_cast<int>(read_u32_le(in));
  if (!in || h != frame.height() || w != frame.width() || k != classes_) {
    fs::remove(out_bin);
    throw Error(Errc::NormalizationViolation,
                fmt::format("segmenter output header {}x{}x{} does not match {}x{}x{}", h, w, k, frame.height(),
                            frame.width(), classes_));
  }
  const std::size_t count = static_cast<std::size_t>(h) * w * k;
  std::vector<float> raw(count);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count * sizeof(float)));
  const bool complete = static_cast<bool>(in);
  in.close();
  fs::remove(out_bin);
  if (!complete) throw Error(Errc::NormalizationViolation, "segmenter output truncated");

  // float32 payload: renormalize each pixel to absorb single-precision rounding.
  std::vector<double> probs(raw.begin(), raw.end());
  for (std::size_t p = 0; p < count; p += static_cast<std::size_t>(k)) {
    double s = 0.0;
    for (int c = 0; c < k; ++c) s += probs[p + static_cast<std::size_t>(c)];
    if (std::abs(s - 1.0) > 1e-3) throw Error(Errc::NormalizationViolation, fmt::format("pixel sums to {}", s));
    for (int c = 0; c < k; ++c) probs[p + static_cast<std::size_t>(c)] /= s;
  }
  return ClassProbabilityField(h, w, k, std::move(probs));
}

}  // namespace bsuv
