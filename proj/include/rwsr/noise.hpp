#pragma once

// Noise-patch harvesting from flat image regions and tiled additive
// injection.
//
// A window p is "smooth" when every q x q sub-window q_j (tiled at stride q)
// satisfies
//   |Mean(q_j) - Mean(p)| <= mu    * Mean(p)
//   |Var(q_j)  - Var(p)|  <= gamma * Var(p)
// and Var(p) >= phi. Statistics are taken on luminance scaled to 8-bit units.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rwsr/codec.hpp"
#include "rwsr/error.hpp"
#include "rwsr/image.hpp"
#include "rwsr/random.hpp"

namespace rwsr {

struct NoiseScanParams {
  int patch_size = 32;
  int sub_size = 8;
  double mu = 0.1;
  double gamma = 0.25;
  double phi = 0.5;  // squared 8-bit intensity units
  int stride = 32;

  void validate() const {
    if (sub_size <= 0 || sub_size > patch_size) {
      throw ArgumentError("noise scan: require 0 < sub_size <= patch_size");
    }
    if (!(mu > 0.0) || !(gamma > 0.0)) throw ArgumentError("noise scan: mu and gamma must be > 0");
    if (!(phi >= 0.0)) throw ArgumentError("noise scan: phi must be >= 0");
    if (stride < 1) throw ArgumentError("noise scan: stride must be >= 1");
  }
};

struct WindowStats {
  double mean = 0.0;
  double variance = 0.0;  // population (divide by N)
};

// Row-major 2D view into a single plane.
struct Window {
  std::span<const float> plane;
  int plane_width = 0;
  int top = 0, left = 0, height = 0, width = 0;

  float at(int y, int x) const {
    return plane[static_cast<std::size_t>(top + y) * plane_width + left + x];
  }
  Window sub(int y, int x, int h, int w) const {
    return {plane, plane_width, top + y, left + x, h, w};
  }
};

inline Window whole_plane(const Image& img, int c = 0) {
  return {img.plane(c), img.width(), 0, 0, img.height(), img.width()};
}

// Two-pass mean/variance, scaled by `scale` (255 for 8-bit units).
inline WindowStats patch_stats(const Window& w, double scale = 1.0) {
  const double n = static_cast<double>(w.height) * w.width;
  double sum = 0.0;
  for (int y = 0; y < w.height; ++y)
    for (int x = 0; x < w.width; ++x) sum += w.at(y, x) * scale;
  const double mean = sum / n;
  double ss = 0.0;
  for (int y = 0; y < w.height; ++y)
    for (int x = 0; x < w.width; ++x) {
      const double d = w.at(y, x) * scale - mean;
      ss += d * d;
    }
  return {mean, ss / n};
}

// `p` is a luminance window in [0,1] units; tests run on samples x 255.
inline bool is_smooth(const Window& p, const NoiseScanParams& params) {
  const auto ps = patch_stats(p, 255.0);
  if (ps.variance < params.phi) return false;
  const int q = params.sub_size;
  for (int y = 0; y + q <= p.height; y += q) {
    for (int x = 0; x + q <= p.width; x += q) {
      const auto qs = patch_stats(p.sub(y, x, q, q), 255.0);
      if (std::abs(qs.mean - ps.mean) > params.mu * ps.mean) return false;
      if (std::abs(qs.variance - ps.variance) > params.gamma * ps.variance) return false;
    }
  }
  return true;
}

// Zero-mean residual patch in image units.
struct NoisePatch {
  int size = 0;
  int channels = 1;
  std::vector<float> residuals;  // channel-major, row-major

  float at(int c, int y, int x) const {
    return residuals[(static_cast<std::size_t>(c) * size + y) * size + x];
  }
  float& at(int c, int y, int x) {
    return residuals[(static_cast<std::size_t>(c) * size + y) * size + x];
  }

  double channel_mean(int c) const {
    double s = 0.0;
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) s += at(c, y, x);
    return s / (static_cast<double>(size) * size);
  }

  friend bool operator==(const NoisePatch&, const NoisePatch&) = default;
};

struct NoisePool {
  std::vector<NoisePatch> patches;

  std::size_t size() const { return patches.size(); }
  bool empty() const { return patches.empty(); }
  // Tile size for injection; all patches share it.
  int patch_size() const { return patches.empty() ? 0 : patches.front().size; }

  void append(std::vector<NoisePatch> more) {
    for (auto& p : more) {
      if (!patches.empty() && (p.size != patch_size() || p.channels != patches.front().channels)) {
        throw ArgumentError("noise pool: patches must share size and channel count");
      }
      patches.push_back(std::move(p));
    }
  }
};

// Subtracts the per-channel mean of a window to produce a residual patch.
inline NoisePatch extract_residual(const Image& img, int top, int left, int size) {
  NoisePatch patch{size, img.channels(),
                   std::vector<float>(static_cast<std::size_t>(size) * size * img.channels())};
  for (int c = 0; c < img.channels(); ++c) {
    const auto stats = patch_stats({img.plane(c), img.width(), top, left, size, size});
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x)
        patch.at(c, y, x) = static_cast<float>(img.at(c, top + y, left + x) - stats.mean);
  }
  return patch;
}

struct ScanHit {
  int top = 0;
  int left = 0;
};

// Window positions (row-major, stride-stepped) whose luminance passes
// is_smooth.
inline std::vector<ScanHit> find_smooth_windows(const Image& img, const NoiseScanParams& params) {
  params.validate();
  std::vector<ScanHit> hits;
  const int p = params.patch_size;
  if (img.height() < p || img.width() < p) return hits;
  const Image luma = to_gray(img);
  const Window plane = whole_plane(luma);
  for (int y = 0; y + p <= img.height(); y += params.stride)
    for (int x = 0; x + p <= img.width(); x += params.stride)
      if (is_smooth(plane.sub(y, x, p, p), params)) hits.push_back({y, x});
  return hits;
}

inline std::vector<NoisePatch> scan_noise_patches(const Image& img, const NoiseScanParams& params) {
  std::vector<NoisePatch> out;
  for (const auto& h : find_smooth_windows(img, params)) {
    out.push_back(extract_residual(img, h.top, h.left, params.patch_size));
  }
  return out;
}

// ---------------------------------------------------------------- injection

struct TileGrid {
  int rows = 0;
  int cols = 0;
};

inline TileGrid tile_grid(const Image& img, int tile) {
  return {(img.height() + tile - 1) / tile, (img.width() + tile - 1) / tile};
}

inline void check_injectable(const Image& img, const NoisePool& pool) {
  if (pool.empty()) throw ArgumentError("inject_noise: noise pool is empty");
  const int pc = pool.patches.front().channels;
  if (pc != img.channels() && pc != 1) {
    throw ArgumentError("inject_noise: pool has " + std::to_string(pc) +
                        "-channel patches, image has " + std::to_string(img.channels()));
  }
}

// Adds pool[indices[t]] to each tile t (row-major), cropping at the borders.
// One-channel patches are broadcast to every image channel.
inline Image apply_noise_tiles(const Image& img, const NoisePool& pool,
                               std::span<const std::uint32_t> indices) {
  check_injectable(img, pool);
  const int t = pool.patch_size();
  const auto grid = tile_grid(img, t);
  if (indices.size() != static_cast<std::size_t>(grid.rows) * grid.cols) {
    throw ArgumentError("apply_noise_tiles: expected " + std::to_string(grid.rows * grid.cols) +
                        " tile indices, got " + std::to_string(indices.size()));
  }
  Image out = img;
  for (int ty = 0; ty < grid.rows; ++ty) {
    for (int tx = 0; tx < grid.cols; ++tx) {
      const std::uint32_t idx = indices[static_cast<std::size_t>(ty) * grid.cols + tx];
      if (idx >= pool.size()) throw ArgumentError("apply_noise_tiles: index out of pool range");
      const NoisePatch& patch = pool.patches[idx];
      const int y0 = ty * t, x0 = tx * t;
      const int h = std::min(t, img.height() - y0), w = std::min(t, img.width() - x0);
      for (int c = 0; c < img.channels(); ++c) {
        const int pc = patch.channels == 1 ? 0 : c;
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x) out.at(c, y0 + y, x0 + x) += patch.at(pc, y, x);
      }
    }
  }
  clamp01(out);
  return out;
}

// One uniform pool draw per tile, tile row-major.
inline std::vector<std::uint32_t> draw_tile_indices(const Image& img, const NoisePool& pool,
                                                    Rng& rng) {
  check_injectable(img, pool);
  const auto grid = tile_grid(img, pool.patch_size());
  std::vector<std::uint32_t> idx(static_cast<std::size_t>(grid.rows) * grid.cols);
  for (auto& i : idx) i = static_cast<std::uint32_t>(rng.index(pool.size()));
  return idx;
}

inline Image inject_noise(const Image& img, const NoisePool& pool, Rng& rng,
                          std::vector<std::uint32_t>* drawn = nullptr) {
  auto idx = draw_tile_indices(img, pool, rng);
  Image out = apply_noise_tiles(img, pool, idx);
  if (drawn) *drawn = std::move(idx);
  return out;
}

// ---------------------------------------------------------------- pool file
//
// "NPOL1", u32 count, then per patch: u16 size, u8 channels,
// size*size*channels f32 residuals. All little-endian.

namespace detail {

inline void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint64_t get_le(std::span<const std::uint8_t> in, std::size_t& pos, int bytes,
                            const std::string& name) {
  if (pos + bytes > in.size()) throw ParseError(name + ": truncated noise pool");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(in[pos + i]) << (8 * i);
  pos += bytes;
  return v;
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_noise_pool(const NoisePool& pool) {
  std::vector<std::uint8_t> out = {'N', 'P', 'O', 'L', '1'};
  detail::put_le(out, pool.size(), 4);
  for (const auto& p : pool.patches) {
    detail::put_le(out, static_cast<std::uint64_t>(p.size), 2);
    detail::put_le(out, static_cast<std::uint64_t>(p.channels), 1);
    for (float v : p.residuals) detail::put_le(out, std::bit_cast<std::uint32_t>(v), 4);
  }
  return out;
}

inline NoisePool deserialize_noise_pool(std::span<const std::uint8_t> in,
                                        const std::string& name = "<pool>") {
  if (in.size() < 5 || std::memcmp(in.data(), "NPOL1", 5) != 0) {
    throw ParseError(name + ": missing NPOL1 magic");
  }
  std::size_t pos = 5;
  const auto count = detail::get_le(in, pos, 4, name);
  NoisePool pool;
  for (std::uint64_t i = 0; i < count; ++i) {
    NoisePatch p;
    p.size = static_cast<int>(detail::get_le(in, pos, 2, name));
    p.channels = static_cast<int>(detail::get_le(in, pos, 1, name));
    if (p.size < 1 || (p.channels != 1 && p.channels != 3)) {
      throw ParseError(name + ": patch " + std::to_string(i) + " has invalid header");
    }
    p.residuals.resize(static_cast<std::size_t>(p.size) * p.size * p.channels);
    for (float& v : p.residuals) {
      v = std::bit_cast<float>(static_cast<std::uint32_t>(detail::get_le(in, pos, 4, name)));
    }
    pool.append({std::move(p)});
  }
  if (pos != in.size()) throw ParseError(name + ": trailing bytes after last patch");
  return pool;
}

inline void save_noise_pool(const NoisePool& pool, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_noise_pool(pool));
}

inline NoisePool load_noise_pool(const std::filesystem::path& path) {
  return deserialize_noise_pool(read_file_bytes(path), path.string());
}

}  // namespace rwsr
