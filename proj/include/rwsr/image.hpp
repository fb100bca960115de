#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rwsr/error.hpp"

namespace rwsr {

// Planar float raster. Samples are nominally in [0,1]; layout is
// channel-major, row-major within a channel.
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels, float fill = 0.0f)
      : height_(height), width_(width), channels_(channels) {
    if (height < 0 || width < 0) throw ArgumentError("Image: negative dimensions");
    if (channels != 1 && channels != 3) {
      throw ArgumentError("Image: channels must be 1 or 3, got " + std::to_string(channels));
    }
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t plane_size() const { return static_cast<std::size_t>(height_) * width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float& at(int c, int y, int x) { return data_[index(c, y, x)]; }
  float at(int c, int y, int x) const { return data_[index(c, y, x)]; }

  // Edge-clamped read.
  float clamped(int c, int y, int x) const {
    y = std::clamp(y, 0, height_ - 1);
    x = std::clamp(x, 0, width_ - 1);
    return data_[index(c, y, x)];
  }

  std::span<float> plane(int c) { return {data_.data() + c * plane_size(), plane_size()}; }
  std::span<const float> plane(int c) const {
    return {data_.data() + c * plane_size(), plane_size()};
  }
  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  bool same_shape(const Image& o) const {
    return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 1;
  std::vector<float> data_;
};

inline void clamp01(Image& img) {
  for (float& v : img.data()) v = std::clamp(v, 0.0f, 1.0f);
}

inline void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ArgumentError(std::string(what) + ": dimension mismatch (" +
                        std::to_string(a.height()) + "x" + std::to_string(a.width()) + "x" +
                        std::to_string(a.channels()) + " vs " + std::to_string(b.height()) +
                        "x" + std::to_string(b.width()) + "x" + std::to_string(b.channels()) +
                        ")");
  }
}

// Top-left anchored crop.
inline Image crop(const Image& img, int top, int left, int height, int width) {
  if (top < 0 || left < 0 || height < 0 || width < 0 || top + height > img.height() ||
      left + width > img.width()) {
    throw ArgumentError("crop: window outside image");
  }
  Image out(height, width, img.channels());
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) out.at(c, y, x) = img.at(c, top + y, left + x);
  return out;
}

// ITU-R BT.601 luma. One-channel input passes through unchanged.
inline Image to_gray(const Image& img) {
  if (img.channels() == 1) return img;
  Image out(img.height(), img.width(), 1);
  auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
  auto y = out.plane(0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = static_cast<float>(0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i]);
  }
  return out;
}

namespace detail {

// Catmull-Rom cubic convolution kernel (a = -0.5).
inline double cubic_weight(double t) {
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

struct ResampleTaps {
  std::vector<int> first;       // leftmost source index per output index (unclamped)
  std::vector<double> weights;  // 4 weights per output index
};

inline ResampleTaps resample_taps(int in_size, int out_size, double scale) {
  ResampleTaps taps;
  taps.first.resize(out_size);
  taps.weights.resize(static_cast<std::size_t>(out_size) * 4);
  for (int o = 0; o < out_size; ++o) {
    const double src = (o + 0.5) / scale - 0.5;
    const int base = static_cast<int>(std::floor(src));
    const double t = src - base;
    taps.first[o] = base - 1;
    for (int k = 0; k < 4; ++k) taps.weights[o * 4 + k] = cubic_weight(t - (k - 1));
  }
  (void)in_size;
  return taps;
}

}  // namespace detail

inline int resized_extent(int extent, double scale) {
  return static_cast<int>(std::lround(extent * scale));
}

// Separable Catmull-Rom resampling with pixel-center alignment and
// edge-clamped taps. Output extent is round(extent * scale).
inline Image bicubic_resize(const Image& img, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ArgumentError("bicubic_resize: scale must be positive, got " + std::to_string(scale));
  }
  const int oh = resized_extent(img.height(), scale);
  const int ow = resized_extent(img.width(), scale);
  if (oh < 1 || ow < 1) throw ArgumentError("bicubic_resize: output would be empty");

  const auto tx = detail::resample_taps(img.width(), ow, scale);
  const auto ty = detail::resample_taps(img.height(), oh, scale);

  Image out(oh, ow, img.channels());
  std::vector<double> rows(static_cast<std::size_t>(img.height()) * ow);
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < ow; ++x) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += tx.weights[x * 4 + k] * img.clamped(c, y, tx.first[x] + k);
        rows[static_cast<std::size_t>(y) * ow + x] = acc;
      }
    }
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) {
          const int sy = std::clamp(ty.first[y] + k, 0, img.height() - 1);
          acc += ty.weights[y * 4 + k] * rows[static_cast<std::size_t>(sy) * ow + x];
        }
        out.at(c, y, x) = static_cast<float>(std::clamp(acc, 0.0, 1.0));
      }
    }
  }
  return out;
}

}  // namespace rwsr
