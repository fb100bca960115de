#pragma once

// Full-reference image quality metrics and the perceptual index.

#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "rwsr/codec.hpp"
#include "rwsr/error.hpp"
#include "rwsr/image.hpp"
#include "rwsr/random.hpp"

namespace rwsr {

// Single-channel double-precision working plane.
struct Plane {
  int height = 0;
  int width = 0;
  std::vector<double> v;

  Plane() = default;
  Plane(int h, int w, double fill = 0.0)
      : height(h), width(w), v(static_cast<std::size_t>(h) * w, fill) {}

  double& at(int y, int x) { return v[static_cast<std::size_t>(y) * width + x]; }
  double at(int y, int x) const { return v[static_cast<std::size_t>(y) * width + x]; }
  double clamped(int y, int x) const {
    return at(std::clamp(y, 0, height - 1), std::clamp(x, 0, width - 1));
  }
};

inline Plane luminance_plane(const Image& img) {
  const Image g = to_gray(img);
  Plane p(g.height(), g.width());
  auto src = g.plane(0);
  for (std::size_t i = 0; i < src.size(); ++i) p.v[i] = src[i];
  return p;
}

// ---------------------------------------------------------------- PSNR

// Peak 1.0 over every sample; identical inputs give +infinity.
inline double psnr(const Image& a, const Image& b) {
  require_same_shape(a, b, "psnr");
  if (a.empty()) throw ArgumentError("psnr: empty image");
  auto da = a.data(), db = b.data();
  double se = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = static_cast<double>(da[i]) - db[i];
    se += d * d;
  }
  const double mse = se / static_cast<double>(da.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

// ---------------------------------------------------------------- SSIM

struct SsimConstants {
  static constexpr int kWindow = 11;
  static constexpr double kSigma = 1.5;
  static constexpr double kK1 = 0.01;
  static constexpr double kK2 = 0.03;
  static constexpr double kC1 = kK1 * kK1;
  static constexpr double kC2 = kK2 * kK2;
};

inline std::vector<double> gaussian_window_1d(int size, double sigma) {
  std::vector<double> w(size);
  const int r = size / 2;
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    w[i] = std::exp(-0.5 * (i - r) * (i - r) / (sigma * sigma));
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

// Valid-region separable filtering: output is (h-n+1) x (w-n+1).
inline Plane filter_valid(const Plane& in, std::span<const double> w) {
  const int n = static_cast<int>(w.size());
  const int oh = in.height - n + 1, ow = in.width - n + 1;
  Plane tmp(in.height, ow);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += w[k] * in.at(y, x + k);
      tmp.at(y, x) = acc;
    }
  Plane out(oh, ow);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += w[k] * tmp.at(y + k, x);
      out.at(y, x) = acc;
    }
  return out;
}

struct SsimTerms {
  double ssim = 0.0;  // mean of l * cs
  double cs = 0.0;    // mean of contrast-structure term
};

inline SsimTerms ssim_terms(const Plane& a, const Plane& b) {
  using C = SsimConstants;
  if (a.height != b.height || a.width != b.width) throw ArgumentError("ssim: dimension mismatch");
  if (a.height < C::kWindow || a.width < C::kWindow) {
    throw ArgumentError("ssim: image smaller than the 11x11 window");
  }
  const auto w = gaussian_window_1d(C::kWindow, C::kSigma);
  Plane aa(a.height, a.width), bb(a.height, a.width), ab(a.height, a.width);
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    aa.v[i] = a.v[i] * a.v[i];
    bb.v[i] = b.v[i] * b.v[i];
    ab.v[i] = a.v[i] * b.v[i];
  }
  const Plane mu_a = filter_valid(a, w), mu_b = filter_valid(b, w);
  const Plane e_aa = filter_valid(aa, w), e_bb = filter_valid(bb, w), e_ab = filter_valid(ab, w);
  double sum_ssim = 0.0, sum_cs = 0.0;
  for (std::size_t i = 0; i < mu_a.v.size(); ++i) {
    const double ma = mu_a.v[i], mb = mu_b.v[i];
    const double va = e_aa.v[i] - ma * ma;
    const double vb = e_bb.v[i] - mb * mb;
    const double cov = e_ab.v[i] - ma * mb;
    const double l = (2.0 * ma * mb + C::kC1) / (ma * ma + mb * mb + C::kC1);
    const double cs = (2.0 * cov + C::kC2) / (va + vb + C::kC2);
    sum_ssim += l * cs;
    sum_cs += cs;
  }
  const double n = static_cast<double>(mu_a.v.size());
  return {sum_ssim / n, sum_cs / n};
}

// Luminance SSIM, 11x11 Gaussian (sigma 1.5), valid windows only.
inline double ssim(const Image& a, const Image& b) {
  require_same_shape(a, b, "ssim");
  return ssim_terms(luminance_plane(a), luminance_plane(b)).ssim;
}

// ---------------------------------------------------------------- MS-SSIM

inline constexpr double kMsSsimWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

// 2x2 box average, then keep every second sample (floor of odd extents).
inline Plane halve(const Plane& p) {
  Plane out(p.height / 2, p.width / 2);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      out.at(y, x) = 0.25 * (p.at(2 * y, 2 * x) + p.at(2 * y, 2 * x + 1) + p.at(2 * y + 1, 2 * x) +
                             p.at(2 * y + 1, 2 * x + 1));
  return out;
}

inline int ms_ssim_min_extent(int scales) { return SsimConstants::kWindow << (scales - 1); }

// Largest scale count (<= 5) the image supports; 0 if smaller than one window.
inline int ms_ssim_max_scales(int height, int width) {
  for (int s = 5; s >= 1; --s)
    if (std::min(height, width) >= ms_ssim_min_extent(s)) return s;
  return 0;
}

// Contrast-structure at the first scales-1 levels, full SSIM at the last;
// weights are the first `scales` standard weights renormalized to sum 1.
// Negative factors are clamped to 0 before exponentiation.
inline double ms_ssim(const Image& a, const Image& b, int scales = 5) {
  require_same_shape(a, b, "ms_ssim");
  if (scales < 1 || scales > 5) throw ArgumentError("ms_ssim: scales must be in [1,5]");
  if (std::min(a.height(), a.width()) < ms_ssim_min_extent(scales)) {
    throw ArgumentError("ms_ssim: image too small for " + std::to_string(scales) +
                        " scales (need min extent " + std::to_string(ms_ssim_min_extent(scales)) +
                        ")");
  }
  double wsum = 0.0;
  for (int i = 0; i < scales; ++i) wsum += kMsSsimWeights[i];
  Plane pa = luminance_plane(a), pb = luminance_plane(b);
  double result = 1.0;
  for (int i = 0; i < scales; ++i) {
    const auto t = ssim_terms(pa, pb);
    const bool last = i == scales - 1;
    const double factor = std::max(last ? t.ssim : t.cs, 0.0);
    result *= std::pow(factor, kMsSsimWeights[i] / wsum);
    if (!last) {
      pa = halve(pa);
      pb = halve(pb);
    }
  }
  return result;
}

// ---------------------------------------------------------------- NLPD

inline constexpr double kPyramidTaps[5] = {0.0625, 0.25, 0.375, 0.25, 0.0625};
inline constexpr double kNlpdConstants[6] = {0.0248, 0.0185, 0.0179, 0.0191, 0.0220, 0.2782};
inline constexpr int kNlpdMaxLevels = 6;

// Edge-clamped separable 5-tap binomial blur.
inline Plane blur5(const Plane& in) {
  Plane tmp(in.height, in.width), out(in.height, in.width);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) {
      double acc = 0.0;
      for (int k = 0; k < 5; ++k) acc += kPyramidTaps[k] * in.clamped(y, x + k - 2);
      tmp.at(y, x) = acc;
    }
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) {
      double acc = 0.0;
      for (int k = 0; k < 5; ++k) acc += kPyramidTaps[k] * tmp.clamped(y + k - 2, x);
      out.at(y, x) = acc;
    }
  return out;
}

// Blur, keep even samples; extent ceil(n/2).
inline Plane pyramid_reduce(const Plane& in) {
  const Plane b = blur5(in);
  Plane out((in.height + 1) / 2, (in.width + 1) / 2);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) out.at(y, x) = b.at(2 * y, 2 * x);
  return out;
}

// Zero-insertion upsampling to (h, w) followed by the blur with gain 4:
// only taps landing on even positions contribute, each weighted 2*tap per axis.
inline Plane pyramid_expand(const Plane& small, int h, int w) {
  Plane tmp(small.height, w);
  for (int y = 0; y < small.height; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < 5; ++k) {
        const int u = x + k - 2;
        if (u % 2 != 0) continue;
        acc += 2.0 * kPyramidTaps[k] * small.at(y, std::clamp(u / 2, 0, small.width - 1));
      }
      tmp.at(y, x) = acc;
    }
  Plane out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < 5; ++k) {
        const int u = y + k - 2;
        if (u % 2 != 0) continue;
        acc += 2.0 * kPyramidTaps[k] * tmp.at(std::clamp(u / 2, 0, small.height - 1), x);
      }
      out.at(y, x) = acc;
    }
  return out;
}

inline int nlpd_levels(int height, int width) {
  int levels = 1;
  while (levels < kNlpdMaxLevels && std::min(height, width) >= 2) {
    height = (height + 1) / 2;
    width = (width + 1) / 2;
    ++levels;
  }
  return levels;
}

// Band-pass levels plus the final low-pass residual.
inline std::vector<Plane> laplacian_pyramid(const Plane& img, int levels) {
  std::vector<Plane> bands;
  Plane cur = img;
  for (int k = 0; k + 1 < levels; ++k) {
    Plane low = pyramid_reduce(cur);
    const Plane up = pyramid_expand(low, cur.height, cur.width);
    Plane band(cur.height, cur.width);
    for (std::size_t i = 0; i < band.v.size(); ++i) band.v[i] = cur.v[i] - up.v[i];
    bands.push_back(std::move(band));
    cur = std::move(low);
  }
  bands.push_back(std::move(cur));
  return bands;
}

// band / (c_k + blur5(|band|))
inline Plane divisive_normalize(const Plane& band, int level) {
  Plane mag(band.height, band.width);
  for (std::size_t i = 0; i < band.v.size(); ++i) mag.v[i] = std::abs(band.v[i]);
  const Plane local = blur5(mag);
  Plane out(band.height, band.width);
  for (std::size_t i = 0; i < band.v.size(); ++i) {
    out.v[i] = band.v[i] / (kNlpdConstants[level] + local.v[i]);
  }
  return out;
}

inline double nlpd(const Image& a, const Image& b) {
  require_same_shape(a, b, "nlpd");
  if (a.empty()) throw ArgumentError("nlpd: empty image");
  const Plane pa = luminance_plane(a), pb = luminance_plane(b);
  const int levels = nlpd_levels(pa.height, pa.width);
  const auto ba = laplacian_pyramid(pa, levels), bb = laplacian_pyramid(pb, levels);
  double total = 0.0;
  for (int k = 0; k < levels; ++k) {
    const Plane na = divisive_normalize(ba[k], k), nb = divisive_normalize(bb[k], k);
    double se = 0.0;
    for (std::size_t i = 0; i < na.v.size(); ++i) {
      const double d = na.v[i] - nb.v[i];
      se += d * d;
    }
    total += std::sqrt(se / static_cast<double>(na.v.size()));
  }
  return total / levels;
}

// ---------------------------------------------------------------- LPIPS

// Planar feature stack: channels x height x width.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> v;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w)
      : channels(c), height(h), width(w), v(static_cast<std::size_t>(c) * h * w, 0.0) {}

  double& at(int c, int y, int x) {
    return v[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return v[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  double clamped(int c, int y, int x) const {
    return at(c, std::clamp(y, 0, height - 1), std::clamp(x, 0, width - 1));
  }
};

// Read-only after construction; safe to share across threads.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual int layer_count() const = 0;
  // One map per layer. Throws ArgumentError if the input is unsupported.
  virtual std::vector<FeatureMap> extract(const Image& img) const = 0;
  // Per-channel weights tau for a layer, all >= 0.
  virtual std::span<const double> channel_weights(int layer) const = 0;
};

// k = 1, features are the pixels themselves, tau = 1.
class IdentityExtractor final : public FeatureExtractor {
 public:
  explicit IdentityExtractor(int channels) : tau_(channels, 1.0) {}

  int layer_count() const override { return 1; }

  std::vector<FeatureMap> extract(const Image& img) const override {
    if (img.channels() != static_cast<int>(tau_.size())) {
      throw ArgumentError("IdentityExtractor: channel count mismatch");
    }
    FeatureMap f(img.channels(), img.height(), img.width());
    auto d = img.data();
    for (std::size_t i = 0; i < d.size(); ++i) f.v[i] = d[i];
    return {std::move(f)};
  }

  std::span<const double> channel_weights(int) const override { return tau_; }

 private:
  std::vector<double> tau_;
};

struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;  // odd
  int stride = 1;
  std::vector<double> weights;  // out x in x kernel x kernel
  std::vector<double> bias;     // out
  std::vector<double> tau;      // out

  double w(int o, int i, int y, int x) const {
    return weights[((static_cast<std::size_t>(o) * in_channels + i) * kernel + y) * kernel + x];
  }

  void validate(int index) const {
    const auto where = "conv layer " + std::to_string(index) + ": ";
    if (in_channels < 1 || out_channels < 1) throw ArgumentError(where + "empty channel count");
    if (kernel < 1 || kernel % 2 == 0) throw ArgumentError(where + "kernel must be odd");
    if (stride < 1) throw ArgumentError(where + "stride must be >= 1");
    if (weights.size() != static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel) {
      throw ArgumentError(where + "weight count mismatch");
    }
    if (bias.size() != static_cast<std::size_t>(out_channels)) {
      throw ArgumentError(where + "bias count mismatch");
    }
    if (tau.size() != static_cast<std::size_t>(out_channels)) {
      throw ArgumentError(where + "tau count mismatch");
    }
    for (double t : tau)
      if (!(t >= 0.0)) throw ArgumentError(where + "tau entries must be >= 0");
  }

  // Same-size (per stride) correlation with edge clamping, then ReLU.
  FeatureMap apply(const FeatureMap& in) const {
    const int oh = (in.height + stride - 1) / stride, ow = (in.width + stride - 1) / stride;
    const int r = kernel / 2;
    FeatureMap out(out_channels, oh, ow);
    for (int o = 0; o < out_channels; ++o)
      for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
          double acc = bias[o];
          for (int i = 0; i < in_channels; ++i)
            for (int dy = -r; dy <= r; ++dy)
              for (int dx = -r; dx <= r; ++dx)
                acc += w(o, i, dy + r, dx + r) * in.clamped(i, y * stride + dy, x * stride + dx);
          out.at(o, y, x) = std::max(acc, 0.0);
        }
    return out;
  }
};

// Chain of conv + ReLU layers; each layer's output is one feature level.
class ConvFeatureExtractor final : public FeatureExtractor {
 public:
  explicit ConvFeatureExtractor(std::vector<ConvLayer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw ArgumentError("ConvFeatureExtractor: no layers");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      layers_[i].validate(static_cast<int>(i));
      if (i > 0 && layers_[i].in_channels != layers_[i - 1].out_channels) {
        throw ArgumentError("ConvFeatureExtractor: layer " + std::to_string(i) +
                            " input channels do not match previous output");
      }
    }
  }

  int layer_count() const override { return static_cast<int>(layers_.size()); }
  int input_channels() const { return layers_.front().in_channels; }
  const std::vector<ConvLayer>& layers() const { return layers_; }

  // Every layer must see at least one full stride step.
  int min_input_extent() const {
    int e = 1;
    for (const auto& l : layers_) e *= l.stride;
    return e;
  }

  std::vector<FeatureMap> extract(const Image& img) const override {
    if (img.channels() != input_channels()) {
      throw ArgumentError("feature extractor expects " + std::to_string(input_channels()) +
                          " channels, got " + std::to_string(img.channels()));
    }
    if (std::min(img.height(), img.width()) < min_input_extent()) {
      throw ArgumentError("feature extractor needs inputs of at least " +
                          std::to_string(min_input_extent()) + " pixels per side");
    }
    FeatureMap cur(img.channels(), img.height(), img.width());
    auto d = img.data();
    for (std::size_t i = 0; i < d.size(); ++i) cur.v[i] = d[i];
    std::vector<FeatureMap> out;
    out.reserve(layers_.size());
    for (const auto& l : layers_) {
      cur = l.apply(cur);
      out.push_back(cur);
    }
    return out;
  }

  std::span<const double> channel_weights(int layer) const override { return layers_[layer].tau; }

 private:
  std::vector<ConvLayer> layers_;
};

// Fixed-seed bank of He-initialized 3x3 filters at three scales
// (strides 1, 2, 2), tau = 1. A stand-in for pretrained features.
inline ConvFeatureExtractor make_random_conv_extractor(int in_channels, std::uint64_t seed = 0) {
  Rng rng(seed);
  const int widths[3] = {8, 16, 16};
  const int strides[3] = {1, 2, 2};
  std::vector<ConvLayer> layers;
  int cin = in_channels;
  for (int i = 0; i < 3; ++i) {
    ConvLayer l;
    l.in_channels = cin;
    l.out_channels = widths[i];
    l.kernel = 3;
    l.stride = strides[i];
    const double scale = std::sqrt(2.0 / (cin * 9));
    l.weights.resize(static_cast<std::size_t>(widths[i]) * cin * 9);
    for (double& w : l.weights) w = scale * rng.gaussian();
    l.bias.assign(widths[i], 0.0);
    l.tau.assign(widths[i], 1.0);
    layers.push_back(std::move(l));
    cin = widths[i];
  }
  return ConvFeatureExtractor(std::move(layers));
}

// {"layers": [{"in", "out", "kernel", "stride", "weights", "bias", "tau"}]}
// with weights flattened out x in x kernel x kernel.
inline ConvFeatureExtractor parse_conv_extractor(const nlohmann::json& j) {
  std::vector<ConvLayer> layers;
  try {
    for (const auto& lj : j.at("layers")) {
      ConvLayer l;
      l.in_channels = lj.at("in").get<int>();
      l.out_channels = lj.at("out").get<int>();
      l.kernel = lj.value("kernel", 3);
      l.stride = lj.value("stride", 1);
      l.weights = lj.at("weights").get<std::vector<double>>();
      l.bias = lj.contains("bias") ? lj["bias"].get<std::vector<double>>()
                                   : std::vector<double>(l.out_channels, 0.0);
      l.tau = lj.contains("tau") ? lj["tau"].get<std::vector<double>>()
                                 : std::vector<double>(l.out_channels, 1.0);
      layers.push_back(std::move(l));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("extractor weights: ") + e.what());
  }
  return ConvFeatureExtractor(std::move(layers));
}

inline ConvFeatureExtractor load_conv_extractor(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return parse_conv_extractor(j);
}

enum class LpipsForm {
  kStandard,  // unit-normalized channels, squared differences
  kLiteral,   // raw features, absolute differences
};

// Per layer: weighted channel distance at each position, averaged spatially;
// summed over layers and divided by the layer count.
inline double lpips(const Image& a, const Image& b, const FeatureExtractor& fx,
                    LpipsForm form = LpipsForm::kStandard) {
  require_same_shape(a, b, "lpips");
  constexpr double kEps = 1e-10;
  const auto fa = fx.extract(a), fb = fx.extract(b);
  const int k = fx.layer_count();
  if (static_cast<int>(fa.size()) != k || static_cast<int>(fb.size()) != k) {
    throw ArgumentError("lpips: extractor returned wrong layer count");
  }
  double total = 0.0;
  for (int layer = 0; layer < k; ++layer) {
    const FeatureMap& x = fa[layer];
    const FeatureMap& y = fb[layer];
    const auto tau = fx.channel_weights(layer);
    if (static_cast<int>(tau.size()) != x.channels) throw ArgumentError("lpips: tau size mismatch");
    double layer_sum = 0.0;
    for (int r = 0; r < x.height; ++r)
      for (int c = 0; c < x.width; ++c) {
        double nx = 1.0, ny = 1.0;
        if (form == LpipsForm::kStandard) {
          double sx = 0.0, sy = 0.0;
          for (int ch = 0; ch < x.channels; ++ch) {
            sx += x.at(ch, r, c) * x.at(ch, r, c);
            sy += y.at(ch, r, c) * y.at(ch, r, c);
          }
          nx = std::sqrt(sx) + kEps;
          ny = std::sqrt(sy) + kEps;
        }
        double d = 0.0;
        for (int ch = 0; ch < x.channels; ++ch) {
          const double diff = x.at(ch, r, c) / nx - y.at(ch, r, c) / ny;
          d += tau[ch] * (form == LpipsForm::kStandard ? diff * diff : std::abs(diff));
        }
        layer_sum += d;
      }
    total += layer_sum / (static_cast<double>(x.height) * x.width);
  }
  return total / k;
}

// ---------------------------------------------------------------- PI

// ((10 - NRQM) + NIQE) / 2; lower is better.
inline double perceptual_index(double niqe, double nrqm) {
  if (!std::isfinite(niqe) || !std::isfinite(nrqm)) {
    throw ArgumentError("perceptual_index: non-finite input");
  }
  return ((10.0 - nrqm) + niqe) / 2.0;
}

// ---------------------------------------------------------------- reports

class MetricReport {
 public:
  explicit MetricReport(std::vector<std::string> metrics) : metrics_(std::move(metrics)) {
    for (const auto& m : metrics_) scores_[m];
  }

  void add(const std::string& image, const std::map<std::string, double>& values) {
    images_.push_back(image);
    for (const auto& m : metrics_) {
      auto it = values.find(m);
      if (it == values.end()) throw ArgumentError("MetricReport: missing metric " + m);
      scores_[m].push_back(it->second);
    }
  }

  const std::vector<std::string>& metrics() const { return metrics_; }
  const std::vector<std::string>& images() const { return images_; }
  const std::vector<double>& scores(const std::string& m) const { return scores_.at(m); }

  double mean(const std::string& m) const {
    const auto& s = scores(m);
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  }

  // Sample standard deviation; 0 for a single entry.
  double stddev(const std::string& m) const {
    const auto& s = scores(m);
    if (s.size() < 2) return 0.0;
    const double mu = mean(m);
    if (!std::isfinite(mu)) return std::numeric_limits<double>::quiet_NaN();
    double ss = 0.0;
    for (double v : s) ss += (v - mu) * (v - mu);
    return std::sqrt(ss / static_cast<double>(s.size() - 1));
  }

 private:
  std::vector<std::string> metrics_;
  std::vector<std::string> images_;
  std::map<std::string, std::vector<double>> scores_;
};

}  // namespace rwsr
