#pragma once

// LR = jpeg( inject_noise( downsample(HR, k_i, s) ) ), with every random draw
// captured in a DegradationRecord so the output can be replayed exactly.

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "rwsr/codec.hpp"
#include "rwsr/image.hpp"
#include "rwsr/kernels.hpp"
#include "rwsr/noise.hpp"
#include "rwsr/random.hpp"

namespace rwsr {

struct DegradationConfig {
  int scale = 4;
  int jpeg_quality = 30;
  double jpeg_probability = 0.9;
  bool noise_enabled = true;
  std::vector<double> augment_scales{1.0, 0.75, 0.5, 0.25};
  std::uint64_t global_seed = 0;

  void validate() const {
    if (scale < 1) throw ArgumentError("degradation: scale must be >= 1");
    if (jpeg_quality < 1 || jpeg_quality > 100) {
      throw ArgumentError("degradation: jpeg_quality must be in [1,100]");
    }
    if (!(jpeg_probability >= 0.0 && jpeg_probability <= 1.0)) {
      throw ArgumentError("degradation: jpeg_probability must be in [0,1]");
    }
    if (augment_scales.empty()) throw ArgumentError("degradation: augment_scales is empty");
    for (double a : augment_scales) {
      if (!(a > 0.0 && a <= 1.0)) throw ArgumentError("degradation: augment scales must be in (0,1]");
    }
  }
};

struct DegradationRecord {
  std::string source_path;
  std::uint32_t kernel_index = 0;
  std::vector<std::uint32_t> noise_indices;  // tile row-major; empty when noise is off
  bool jpeg_applied = false;
  double augment_scale = 1.0;
  std::uint64_t derived_seed = 0;

  friend bool operator==(const DegradationRecord&, const DegradationRecord&) = default;
};

struct DegradeResult {
  Image lr;
  DegradationRecord record;
};

// Draw order: kernel index, tile noise indices, JPEG Bernoulli.
inline DegradeResult degrade_image(const Image& hr, const KernelPool& kpool, const NoisePool& npool,
                                   const DegradationConfig& cfg, Rng& rng) {
  if (kpool.empty()) throw ArgumentError("degrade_image: kernel pool is empty");
  if (cfg.noise_enabled && npool.empty()) throw ArgumentError("degrade_image: noise pool is empty");
  DegradeResult res;
  res.record.kernel_index = static_cast<std::uint32_t>(rng.index(kpool.size()));
  Image img = downsample(hr, kpool[res.record.kernel_index], cfg.scale);
  if (cfg.noise_enabled) img = inject_noise(img, npool, rng, &res.record.noise_indices);
  res.record.jpeg_applied = rng.bernoulli(cfg.jpeg_probability);
  if (res.record.jpeg_applied) img = jpeg_roundtrip(img, cfg.jpeg_quality);
  res.lr = std::move(img);
  return res;
}

// Recomputes the LR image from a record without touching any generator.
inline Image replay_degradation(const Image& hr, const KernelPool& kpool, const NoisePool& npool,
                                const DegradationConfig& cfg, const DegradationRecord& rec) {
  if (rec.kernel_index >= kpool.size()) throw ArgumentError("replay: kernel index out of range");
  Image img = downsample(hr, kpool[rec.kernel_index], cfg.scale);
  if (!rec.noise_indices.empty()) img = apply_noise_tiles(img, npool, rec.noise_indices);
  if (rec.jpeg_applied) img = jpeg_roundtrip(img, cfg.jpeg_quality);
  return img;
}

// i.i.d. Gaussian noise of standard deviation sigma/255 per sample, drawn in
// storage order, then clamped.
inline Image add_gaussian_noise(const Image& img, double sigma_8bit, Rng& rng) {
  if (!(sigma_8bit >= 0.0)) throw ArgumentError("add_gaussian_noise: sigma must be >= 0");
  Image out = img;
  const double sd = sigma_8bit / 255.0;
  for (float& v : out.data()) v = static_cast<float>(v + sd * rng.gaussian());
  clamp01(out);
  return out;
}

// Ground-truth evaluation corruption: pool kernel downsampling, Gaussian
// noise, then JPEG (always applied).
inline Image synthetic_corrupt(const Image& hr, const KernelPool& kpool, int scale,
                               double sigma_8bit, int jpeg_quality, Rng& rng) {
  if (kpool.empty()) throw ArgumentError("synthetic_corrupt: kernel pool is empty");
  if (jpeg_quality < 1 || jpeg_quality > 100) {
    throw ArgumentError("synthetic_corrupt: jpeg_quality must be in [1,100]");
  }
  const auto k = rng.index(kpool.size());
  Image img = downsample(hr, kpool[k], scale);
  img = add_gaussian_noise(img, sigma_8bit, rng);
  return jpeg_roundtrip(img, jpeg_quality);
}

// ---------------------------------------------------------------- datasets

inline std::string format_scale(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", s);
  return buf;
}

// Stable across machines: FNV-1a over (seed, relative path, scale text),
// finalized with splitmix64.
inline std::uint64_t derive_seed(std::uint64_t global_seed, const std::string& relative_path,
                                 double augment_scale) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", augment_scale);
  return StableHash().u64(global_seed).bytes(relative_path).bytes(std::string_view("\0", 1))
      .bytes(buf).digest();
}

// Top-left anchored crop to a multiple of s in both dimensions.
inline Image crop_to_multiple(const Image& img, int s) {
  return crop(img, 0, 0, img.height() / s * s, img.width() / s * s);
}

// Runs fn(i) for i in [0, n) on `jobs` threads. Exceptions are rethrown on
// the calling thread (the first one by index).
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  const int count = static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(jobs)));
  for (int t = 0; t < count; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline nlohmann::json to_json(const DegradationConfig& c) {
  return {{"scale", c.scale},
          {"jpeg_quality", c.jpeg_quality},
          {"jpeg_probability", c.jpeg_probability},
          {"noise_enabled", c.noise_enabled},
          {"augment_scales", c.augment_scales},
          {"global_seed", c.global_seed}};
}

inline void from_json(const nlohmann::json& j, DegradationConfig& c) {
  c.scale = j.value("scale", c.scale);
  c.jpeg_quality = j.value("jpeg_quality", c.jpeg_quality);
  c.jpeg_probability = j.value("jpeg_probability", c.jpeg_probability);
  c.noise_enabled = j.value("noise_enabled", c.noise_enabled);
  c.augment_scales = j.value("augment_scales", c.augment_scales);
  c.global_seed = j.value("global_seed", c.global_seed);
}

inline nlohmann::json to_json(const DegradationRecord& r) {
  return {{"source_path", r.source_path},   {"kernel_index", r.kernel_index},
          {"noise_indices", r.noise_indices}, {"jpeg_applied", r.jpeg_applied},
          {"augment_scale", r.augment_scale}, {"derived_seed", r.derived_seed}};
}

inline DegradationRecord record_from_json(const nlohmann::json& j) {
  DegradationRecord r;
  r.source_path = j.at("source_path").get<std::string>();
  r.kernel_index = j.at("kernel_index").get<std::uint32_t>();
  r.noise_indices = j.at("noise_indices").get<std::vector<std::uint32_t>>();
  r.jpeg_applied = j.at("jpeg_applied").get<bool>();
  r.augment_scale = j.at("augment_scale").get<double>();
  r.derived_seed = j.at("derived_seed").get<std::uint64_t>();
  return r;
}

struct PairEntry {
  std::string hr_file;
  std::string lr_file;
  int hr_height = 0, hr_width = 0;
  int lr_height = 0, lr_width = 0;
  DegradationRecord record;
};

struct SkippedEntry {
  std::string source_path;
  std::string reason;
};

struct PairManifest {
  std::vector<PairEntry> pairs;
  std::vector<SkippedEntry> skipped;
  nlohmann::json extra;  // config echo, pool hashes; supplied by the caller

  nlohmann::json to_json() const {
    nlohmann::json j = extra.is_object() ? extra : nlohmann::json::object();
    j["pairs"] = nlohmann::json::array();
    for (const auto& p : pairs) {
      auto rec = rwsr::to_json(p.record);
      rec["hr_file"] = p.hr_file;
      rec["lr_file"] = p.lr_file;
      rec["hr_size"] = {p.hr_height, p.hr_width};
      rec["lr_size"] = {p.lr_height, p.lr_width};
      j["pairs"].push_back(std::move(rec));
    }
    j["skipped"] = nlohmann::json::array();
    for (const auto& s : skipped) {
      j["skipped"].push_back({{"source_path", s.source_path}, {"reason", s.reason}});
    }
    return j;
  }
};

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// FNV-1a of a file's bytes, as 16 hex digits.
inline std::string file_fingerprint(const std::filesystem::path& p) {
  const auto bytes = read_file_bytes(p);
  return hex64(StableHash().bytes({reinterpret_cast<const char*>(bytes.data()), bytes.size()}).raw());
}

using Logger = std::function<void(const std::string&)>;

inline void log_to_stderr(const std::string& msg) { std::cerr << msg << '\n'; }

// For each image in hq_dir and each augment scale: HR = bicubic resize
// cropped to a multiple of s, LR = degrade_image(HR) seeded from
// derive_seed(global_seed, file name, scale). Writes <stem>_x<scale>_hr.png,
// <stem>_x<scale>_lr.png and manifest.json. Output bytes do not depend on
// `jobs`.
inline PairManifest generate_pairs(const std::filesystem::path& hq_dir, const KernelPool& kpool,
                                   const NoisePool& npool, const DegradationConfig& cfg,
                                   const std::filesystem::path& out_dir, int jobs = 1,
                                   nlohmann::json manifest_extra = {},
                                   const Logger& log = log_to_stderr) {
  cfg.validate();
  if (kpool.empty()) throw ArgumentError("generate_pairs: kernel pool is empty");
  if (cfg.noise_enabled && npool.empty()) throw ArgumentError("generate_pairs: noise pool is empty");
  const auto files = list_images(hq_dir);
  if (files.empty()) throw IoError("no images found in " + hq_dir.string());
  std::filesystem::create_directories(out_dir);

  struct Slot {
    std::vector<PairEntry> pairs;
    std::vector<SkippedEntry> skipped;
  };
  std::vector<Slot> slots(files.size());
  std::mutex log_mu;
  auto say = [&](const std::string& m) {
    std::lock_guard lock(log_mu);
    log(m);
  };

  parallel_for(files.size(), jobs, [&](std::size_t i) {
    const std::string rel = files[i].filename().generic_string();
    Slot& slot = slots[i];
    Image hq;
    try {
      hq = load_image(files[i]);
    } catch (const IoError& e) {
      say(std::string("warning: skipping ") + rel + ": " + e.what());
      slot.skipped.push_back({rel, e.what()});
      return;
    }
    const std::string stem = files[i].stem().string();
    for (double a : cfg.augment_scales) {
      const std::string tag = stem + "_x" + format_scale(a);
      Image hr = a == 1.0 ? hq : bicubic_resize(hq, a);
      // degrade the HR exactly as it will be stored
      hr = quantize8(crop_to_multiple(hr, cfg.scale));
      int kmax = 1;
      for (const auto& k : kpool.kernels) kmax = std::max(kmax, k.size);
      if (hr.height() < std::max(cfg.scale, kmax) || hr.width() < std::max(cfg.scale, kmax)) {
        const std::string why = "too small at augment scale " + format_scale(a);
        say("warning: skipping " + rel + ": " + why);
        slot.skipped.push_back({rel, why});
        continue;
      }
      const auto seed = derive_seed(cfg.global_seed, rel, a);
      Rng rng(seed);
      auto res = degrade_image(hr, kpool, npool, cfg, rng);
      res.record.source_path = rel;
      res.record.augment_scale = a;
      res.record.derived_seed = seed;
      PairEntry e{tag + "_hr.png", tag + "_lr.png", hr.height(), hr.width(),
                  res.lr.height(),  res.lr.width(), std::move(res.record)};
      save_png(hr, out_dir / e.hr_file);
      save_png(res.lr, out_dir / e.lr_file);
      slot.pairs.push_back(std::move(e));
    }
    say("degraded " + rel);
  });

  PairManifest manifest;
  manifest.extra = std::move(manifest_extra);
  for (auto& s : slots) {
    for (auto& p : s.pairs) manifest.pairs.push_back(std::move(p));
    for (auto& k : s.skipped) manifest.skipped.push_back(std::move(k));
  }
  write_file_atomic(out_dir / "manifest.json", manifest.to_json().dump(2) + "\n");
  return manifest;
}

}  // namespace rwsr
