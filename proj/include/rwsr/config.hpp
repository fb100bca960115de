#pragma once

// JSON pipeline configuration:
//   {"degradation": {...}, "noise_scan": {...}, "kernels": {...}}
// Missing keys keep their defaults.

#include <filesystem>
#include <string>

#include "json.hpp"

#include "rwsr/codec.hpp"
#include "rwsr/degrade.hpp"
#include "rwsr/error.hpp"
#include "rwsr/kernels.hpp"
#include "rwsr/noise.hpp"

namespace rwsr {

struct PipelineConfig {
  DegradationConfig degradation;
  NoiseScanParams noise_scan;
  KernelSynthesisParams kernels;
};

inline nlohmann::json to_json(const NoiseScanParams& p) {
  return {{"patch_size", p.patch_size}, {"sub_size", p.sub_size}, {"mu", p.mu},
          {"gamma", p.gamma},           {"phi", p.phi},           {"stride", p.stride}};
}

inline nlohmann::json to_json(const KernelSynthesisParams& p) {
  return {{"count", p.count},         {"size", p.size},           {"sigma_min", p.sigma_min},
          {"sigma_max", p.sigma_max}, {"theta_min", p.theta_min}, {"theta_max", p.theta_max}};
}

inline nlohmann::json to_json(const PipelineConfig& c) {
  return {{"degradation", to_json(c.degradation)},
          {"noise_scan", to_json(c.noise_scan)},
          {"kernels", to_json(c.kernels)}};
}

inline PipelineConfig parse_pipeline_config(const nlohmann::json& j) {
  PipelineConfig c;
  try {
    if (j.contains("degradation")) from_json(j["degradation"], c.degradation);
    if (j.contains("noise_scan")) {
      const auto& n = j["noise_scan"];
      auto& p = c.noise_scan;
      p.patch_size = n.value("patch_size", p.patch_size);
      p.sub_size = n.value("sub_size", p.sub_size);
      p.mu = n.value("mu", p.mu);
      p.gamma = n.value("gamma", p.gamma);
      p.phi = n.value("phi", p.phi);
      // Stride follows the patch size unless given explicitly.
      p.stride = n.value("stride", p.patch_size);
    }
    if (j.contains("kernels")) {
      const auto& k = j["kernels"];
      auto& p = c.kernels;
      p.count = k.value("count", p.count);
      p.size = k.value("size", p.size);
      p.sigma_min = k.value("sigma_min", p.sigma_min);
      p.sigma_max = k.value("sigma_max", p.sigma_max);
      p.theta_min = k.value("theta_min", p.theta_min);
      p.theta_max = k.value("theta_max", p.theta_max);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  c.degradation.validate();
  c.noise_scan.validate();
  return c;
}

inline PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return parse_pipeline_config(nlohmann::json::parse(bytes.begin(), bytes.end()));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace rwsr
