#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "rwsr/codec.hpp"
#include "rwsr/error.hpp"
#include "rwsr/image.hpp"
#include "rwsr/random.hpp"

namespace rwsr {

// Square odd-sized correlation kernel, row-major weights.
struct Kernel {
  int size = 1;
  std::vector<double> weights{1.0};

  double at(int y, int x) const { return weights[static_cast<std::size_t>(y) * size + x]; }
  double& at(int y, int x) { return weights[static_cast<std::size_t>(y) * size + x]; }
  int radius() const { return size / 2; }

  double sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }

  static Kernel delta(int size) {
    check_size(size);
    Kernel k{size, std::vector<double>(static_cast<std::size_t>(size) * size, 0.0)};
    k.at(size / 2, size / 2) = 1.0;
    return k;
  }

  static void check_size(int size) {
    if (size < 1 || size % 2 == 0) {
      throw ArgumentError("kernel size must be odd and >= 1, got " + std::to_string(size));
    }
  }

  friend bool operator==(const Kernel&, const Kernel&) = default;
};

struct KernelPool {
  std::vector<Kernel> kernels;

  std::size_t size() const { return kernels.size(); }
  bool empty() const { return kernels.empty(); }
  const Kernel& operator[](std::size_t i) const { return kernels[i]; }
};

// Rotated anisotropic Gaussian sampled at integer offsets, normalized to sum 1.
// theta rotates the sigma_x axis counter-clockwise in (x right, y down) pixel
// coordinates.
inline Kernel gaussian_aniso_kernel(double sigma_x, double sigma_y, double theta, int size) {
  Kernel::check_size(size);
  if (!(sigma_x > 0.0) || !(sigma_y > 0.0)) {
    throw ArgumentError("gaussian_aniso_kernel: sigmas must be positive");
  }
  const double c = std::cos(theta), s = std::sin(theta);
  const double ix = 1.0 / (sigma_x * sigma_x), iy = 1.0 / (sigma_y * sigma_y);
  Kernel k{size, std::vector<double>(static_cast<std::size_t>(size) * size)};
  const int r = size / 2;
  double total = 0.0;
  for (int y = -r; y <= r; ++y) {
    for (int x = -r; x <= r; ++x) {
      const double u = c * x + s * y;   // along the sigma_x axis
      const double v = -s * x + c * y;  // along the sigma_y axis
      const double w = std::exp(-0.5 * (u * u * ix + v * v * iy));
      k.at(y + r, x + r) = w;
      total += w;
    }
  }
  for (double& w : k.weights) w /= total;
  return k;
}

// Ranges for synthesizing a kernel pool.
struct KernelSynthesisParams {
  int count = 64;
  int size = 11;
  double sigma_min = 0.6;
  double sigma_max = 3.0;
  double theta_min = 0.0;
  double theta_max = std::numbers::pi;
};

inline KernelPool synthesize_kernel_pool(const KernelSynthesisParams& p, Rng& rng) {
  if (p.count < 1) throw ArgumentError("kernel pool count must be >= 1");
  if (!(p.sigma_min > 0.0) || p.sigma_max < p.sigma_min) {
    throw ArgumentError("kernel sigma range must satisfy 0 < min <= max");
  }
  if (p.theta_max < p.theta_min) throw ArgumentError("kernel theta range is inverted");
  KernelPool pool;
  pool.kernels.reserve(p.count);
  for (int i = 0; i < p.count; ++i) {
    const double sx = p.sigma_min + (p.sigma_max - p.sigma_min) * rng.uniform();
    const double sy = p.sigma_min + (p.sigma_max - p.sigma_min) * rng.uniform();
    const double th = p.theta_min + (p.theta_max - p.theta_min) * rng.uniform();
    pool.kernels.push_back(gaussian_aniso_kernel(sx, sy, th, p.size));
  }
  return pool;
}

// Per-channel cross-correlation with edge-clamped borders, evaluated only at
// the stride-s sample positions (offset 0). Output extent is ceil(extent/s).
inline Image downsample(const Image& img, const Kernel& k, int s) {
  if (s < 1) throw ArgumentError("downsample: stride must be >= 1");
  if (img.height() < k.size || img.width() < k.size) {
    throw ArgumentError("downsample: image smaller than kernel");
  }
  const int oh = (img.height() + s - 1) / s;
  const int ow = (img.width() + s - 1) / s;
  const int r = k.radius();
  Image out(oh, ow, img.channels());
  for (int c = 0; c < img.channels(); ++c) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        const int cy = oy * s, cx = ox * s;
        double acc = 0.0;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx)
            acc += k.at(dy + r, dx + r) * img.clamped(c, cy + dy, cx + dx);
        out.at(c, oy, ox) = static_cast<float>(std::clamp(acc, 0.0, 1.0));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- files
//
//   # optional comments
//   KERN1 <size>
//   <size lines of size space-separated decimals>
//
// A pool file is a sequence of such blocks.

inline std::string format_kernel(const Kernel& k) {
  std::string out = "KERN1 " + std::to_string(k.size) + "\n";
  char buf[32];
  for (int y = 0; y < k.size; ++y) {
    for (int x = 0; x < k.size; ++x) {
      std::snprintf(buf, sizeof buf, "%.17g", k.at(y, x));
      if (x) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

struct LoadedKernel {
  Kernel kernel;
  double raw_sum = 1.0;
  bool renormalized = false;  // |raw_sum - 1| > 1e-3
};

namespace detail {

class KernelReader {
 public:
  KernelReader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

  // Returns false at clean end of input.
  bool next(LoadedKernel& out) {
    std::string line;
    for (;;) {
      if (!std::getline(in_, line)) return false;
      ++lineno_;
      strip(line);
      if (line.empty() || line[0] == '#') continue;
      break;
    }
    std::istringstream hdr(line);
    std::string magic;
    int size = 0;
    std::string extra;
    if (!(hdr >> magic >> size) || magic != "KERN1" || (hdr >> extra)) {
      fail("malformed header, expected 'KERN1 <size>'");
    }
    if (size < 1 || size % 2 == 0) fail("kernel size must be odd and >= 1");

    Kernel k{size, {}};
    k.weights.reserve(static_cast<std::size_t>(size) * size);
    for (int row = 0; row < size; ++row) {
      if (!std::getline(in_, line)) {
        fail("expected " + std::to_string(size) + " rows, got " + std::to_string(row), true);
      }
      ++lineno_;
      strip(line);
      std::istringstream rs(line);
      std::string tok;
      int n = 0;
      while (rs >> tok) {
        double v;
        try {
          std::size_t used = 0;
          v = std::stod(tok, &used);
          if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
          fail("not a number: '" + tok + "'");
        }
        if (!std::isfinite(v)) fail("non-finite kernel entry");
        k.weights.push_back(v);
        ++n;
      }
      if (n != size) {
        fail("row has " + std::to_string(n) + " values, expected " + std::to_string(size));
      }
    }
    const double sum = k.sum();
    if (!(std::abs(sum) > 1e-12)) fail("kernel weights sum to zero");
    for (double& w : k.weights) w /= sum;
    out = {std::move(k), sum, std::abs(sum - 1.0) > 1e-3};
    return true;
  }

 private:
  static void strip(std::string& s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    s.erase(0, i);
  }

  [[noreturn]] void fail(const std::string& what, bool eof = false) const {
    throw ParseError(name_ + ":" + std::to_string(eof ? lineno_ + 1 : lineno_) + ": " + what);
  }

  std::istream& in_;
  std::string name_;
  int lineno_ = 0;
};

}  // namespace detail

inline LoadedKernel parse_kernel(const std::string& text, const std::string& name = "<kernel>") {
  std::istringstream in(text);
  detail::KernelReader reader(in, name);
  LoadedKernel k;
  if (!reader.next(k)) throw ParseError(name + ":1: missing KERN1 header");
  LoadedKernel extra;
  if (reader.next(extra)) throw ParseError(name + ": more than one kernel in a kernel file");
  return k;
}

inline void save_kernel(const Kernel& k, const std::filesystem::path& path) {
  write_file_atomic(path, format_kernel(k));
}

inline LoadedKernel load_kernel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_kernel(ss.str(), path.string());
}

inline void save_kernel_pool(const KernelPool& pool, const std::filesystem::path& path) {
  std::string text = "# kernel pool, " + std::to_string(pool.size()) + " kernels\n";
  for (const auto& k : pool.kernels) text += format_kernel(k);
  write_file_atomic(path, text);
}

inline KernelPool load_kernel_pool(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  detail::KernelReader reader(in, path.string());
  KernelPool pool;
  LoadedKernel k;
  while (reader.next(k)) pool.kernels.push_back(std::move(k.kernel));
  if (pool.empty()) throw ParseError(path.string() + ": kernel pool is empty");
  return pool;
}

}  // namespace rwsr
