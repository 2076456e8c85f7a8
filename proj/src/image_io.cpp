#include "bsuv/image_io.hpp"

#include <cmath>

#include <fmt/format.h>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "bsuv/error.hpp"

namespace bsuv {

namespace {

cv::Mat read_any(const fs::path& path, int flags) {
  if (!fs::exists(path)) throw Error(Errc::MissingFrame, path.string());
  cv::Mat m = cv::imread(path.string(), flags);
  if (m.empty()) throw Error(Errc::CorruptImage, path.string());
  return m;
}

void write_any(const fs::path& path, const cv::Mat& m) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), m)) throw Error(Errc::Io, "cannot write " + path.string());
}

std::uint16_t to_u16(double v) { return static_cast<std::uint16_t>(std::lround(v * 65535.0)); }

}  // namespace

LabelMap decode_label_map(const GrayImage8& image) {
  std::vector<Label> labels(image.pixels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    switch (image.pixels[i]) {
      case label_code::kBackground: labels[i] = Label::Background; break;
      case label_code::kHardShadow: labels[i] = Label::HardShadow; break;
      case label_code::kOutsideRoi: labels[i] = Label::OutsideROI; break;
      case label_code::kUnknownMotion: labels[i] = Label::UnknownMotion; break;
      case label_code::kForeground: labels[i] = Label::Foreground; break;
      default:
        throw Error(Errc::UnknownLabelValue,
                    fmt::format("value {} at pixel {}", static_cast<int>(image.pixels[i]), i));
    }
  }
  return LabelMap(image.height, image.width, std::move(labels));
}

GrayImage8 encode_label_map(const LabelMap& labels) {
  GrayImage8 out{labels.height(), labels.width(), std::vector<std::uint8_t>(labels.size())};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    switch (labels[i]) {
      case Label::Background: out.pixels[i] = label_code::kBackground; break;
      case Label::HardShadow: out.pixels[i] = label_code::kHardShadow; break;
      case Label::OutsideROI: out.pixels[i] = label_code::kOutsideRoi; break;
      case Label::UnknownMotion: out.pixels[i] = label_code::kUnknownMotion; break;
      case Label::Foreground: out.pixels[i] = label_code::kForeground; break;
    }
  }
  return out;
}

GrayImage8 encode_mask(const BinaryMask& mask) {
  GrayImage8 out{mask.height(), mask.width(), std::vector<std::uint8_t>(mask.size())};
  for (std::size_t i = 0; i < mask.size(); ++i) out.pixels[i] = mask[i] ? 255 : 0;
  return out;
}

BinaryMask decode_mask(const GrayImage8& image) {
  std::vector<std::uint8_t> v(image.pixels.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = image.pixels[i] >= 128 ? 1 : 0;
  return BinaryMask(image.height, image.width, std::move(v));
}

ColorFrame color_from_bytes(int height, int width, std::span<const std::uint8_t> rgb) {
  std::vector<double> data(rgb.size());
  for (std::size_t i = 0; i < rgb.size(); ++i) data[i] = rgb[i] / 255.0;
  return ColorFrame(height, width, std::move(data));
}

ColorFrame read_color_frame(const fs::path& path) {
  cv::Mat m = read_any(path, cv::IMREAD_COLOR | cv::IMREAD_ANYDEPTH);
  const int h = m.rows, w = m.cols;
  std::vector<double> data(static_cast<std::size_t>(h) * w * 3);
  const double scale = m.depth() == CV_16U ? 1.0 / 65535.0 : 1.0 / 255.0;
  if (m.depth() != CV_8U && m.depth() != CV_16U) throw Error(Errc::CorruptImage, path.string());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        // OpenCV stores BGR.
        const double raw = m.depth() == CV_16U ? m.at<cv::Vec3w>(y, x)[2 - c] : m.at<cv::Vec3b>(y, x)[2 - c];
        data[(static_cast<std::size_t>(y) * w + x) * 3 + c] = raw * scale;
      }
    }
  }
  return ColorFrame(h, w, std::move(data));
}

GrayImage8 read_gray8(const fs::path& path) {
  cv::Mat m = read_any(path, cv::IMREAD_GRAYSCALE);
  GrayImage8 out{m.rows, m.cols, {}};
  out.pixels.resize(static_cast<std::size_t>(m.rows) * m.cols);
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<std::uint8_t>(y);
    std::copy(row, row + m.cols, out.pixels.begin() + static_cast<std::ptrdiff_t>(y) * m.cols);
  }
  return out;
}

void write_gray8(const fs::path& path, const GrayImage8& image) {
  cv::Mat m(image.height, image.width, CV_8UC1);
  std::copy(image.pixels.begin(), image.pixels.end(), m.ptr<std::uint8_t>(0));
  write_any(path, m);
}

void write_probability16(const fs::path& path, const ProbabilityMap& map) {
  cv::Mat m(map.height(), map.width(), CV_16UC1);
  auto* dst = m.ptr<std::uint16_t>(0);
  for (std::size_t i = 0; i < map.size(); ++i) dst[i] = to_u16(map[i]);
  write_any(path, m);
}

ProbabilityMap read_probability16(const fs::path& path) {
  cv::Mat m = read_any(path, cv::IMREAD_UNCHANGED);
  if (m.type() != CV_16UC1) throw Error(Errc::CorruptImage, path.string() + " is not 16-bit single channel");
  std::vector<double> v(static_cast<std::size_t>(m.rows) * m.cols);
  const auto* src = m.ptr<std::uint16_t>(0);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = src[i] / 65535.0;
  return ProbabilityMap(m.rows, m.cols, std::move(v));
}

void write_color16(const fs::path& path, const ColorFrame& frame) {
  cv::Mat m(frame.height(), frame.width(), CV_16UC3);
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      auto& px = m.at<cv::Vec3w>(y, x);
      for (int c = 0; c < 3; ++c) px[2 - c] = to_u16(frame.at(y, x, c));
    }
  }
  write_any(path, m);
}

ColorFrame read_color16(const fs::path& path) {
  cv::Mat m = read_any(path, cv::IMREAD_UNCHANGED);
  if (m.type() != CV_16UC3) throw Error(Errc::CorruptImage, path.string() + " is not 16-bit RGB");
  return read_color_frame(path);
}

void write_color8(const fs::path& path, const ColorFrame& frame) {
  cv::Mat m(frame.height(), frame.width(), CV_8UC3);
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      auto& px = m.at<cv::Vec3b>(y, x);
      for (int c = 0; c < 3; ++c) px[2 - c] = static_cast<std::uint8_t>(std::lround(frame.at(y, x, c) * 255.0));
    }
  }
  write_any(path, m);
}

}  // namespace bsuv
