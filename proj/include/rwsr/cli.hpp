#pragma once

// The `rwsr` command line: one binary, one subcommand per pipeline stage.
// Exit codes: 0 success, 1 usage/validation error, 2 I/O error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "rwsr/codec.hpp"
#include "rwsr/config.hpp"
#include "rwsr/degrade.hpp"
#include "rwsr/kernels.hpp"
#include "rwsr/metrics.hpp"
#include "rwsr/mor.hpp"
#include "rwsr/noise.hpp"

namespace rwsr::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

struct Streams {
  std::ostream& out = std::cout;
  std::ostream& err = std::cerr;
};

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool verbose = false;
};

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Shortest round-trip form, with ".0" kept for integral values.
inline std::string format_mor(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  std::string s = buf;
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

class Runner {
 public:
  explicit Runner(Streams io) : io_(io) {}

  int run(const std::vector<std::string>& args) {
    CLI::App app{"Realistic LR/HR pair generation and SR evaluation toolkit", "rwsr"};
    app.require_subcommand(1);

    // build-kernels
    auto* bk = app.add_subcommand("build-kernels", "Synthesize an anisotropic Gaussian kernel pool");
    std::string bk_out;
    std::optional<int> bk_count, bk_size;
    bk->add_option("--out", bk_out, "Output kernel pool file")->required();
    bk->add_option("--count", bk_count, "Number of kernels (default 64)");
    bk->add_option("--size", bk_size, "Odd kernel side length (default 11)");
    add_common(bk);

    // harvest-noise
    auto* hn = app.add_subcommand("harvest-noise", "Harvest zero-mean noise patches from flat regions");
    std::string hn_src, hn_out;
    hn->add_option("--src", hn_src, "Directory of source-domain images")->required();
    hn->add_option("--out", hn_out, "Output noise pool file")->required();
    add_common(hn);

    // degrade
    auto* dg = app.add_subcommand("degrade", "Generate LR/HR training pairs");
    std::string dg_hq, dg_k, dg_n, dg_out;
    bool dg_no_noise = false;
    dg->add_option("--hq", dg_hq, "Directory of clean HR images")->required();
    dg->add_option("--kernels", dg_k, "Kernel pool file")->required();
    dg->add_option("--noise", dg_n, "Noise pool file");
    dg->add_option("--out", dg_out, "Output directory")->required();
    dg->add_flag("--no-noise", dg_no_noise, "Disable noise injection");
    add_common(dg);

    // corrupt-synthetic
    auto* cs = app.add_subcommand("corrupt-synthetic",
                                  "Blur/downsample, add Gaussian noise and JPEG-compress");
    std::string cs_hq, cs_k, cs_out;
    double cs_sigma = 8.0;
    int cs_quality = 30;
    std::optional<int> cs_scale;
    cs->add_option("--hq", cs_hq, "Directory of clean HR images")->required();
    cs->add_option("--kernels", cs_k, "Kernel pool file")->required();
    cs->add_option("--out", cs_out, "Output directory")->required();
    cs->add_option("--sigma", cs_sigma, "Noise standard deviation in 8-bit units")
        ->check(CLI::NonNegativeNumber);
    cs->add_option("--quality", cs_quality, "JPEG quality")->check(CLI::Range(1, 100));
    cs->add_option("--scale", cs_scale, "Downsampling factor (default from config, 4)");
    add_common(cs);

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Full-reference metrics of SR outputs against GT");
    std::string ev_sr, ev_gt, ev_out, ev_nr, ev_fx;
    ev->add_option("--sr", ev_sr, "Directory of SR outputs")->required();
    ev->add_option("--gt", ev_gt, "Directory of ground-truth images")->required();
    ev->add_option("--out", ev_out, "Output report CSV")->required();
    ev->add_option("--nr-scores", ev_nr, "CSV with columns image,niqe,nrqm; adds a PI column");
    ev->add_option("--extractor", ev_fx, "LPIPS feature-extractor weights (JSON)");
    add_common(ev);

    // mor
    auto* mor = app.add_subcommand("mor", "Mean Opinion Rank studies");
    mor->require_subcommand(1);
    auto* mp = mor->add_subcommand("prepare", "Build a shuffled study manifest");
    std::vector<std::string> mp_methods, mp_images;
    std::string mp_out, mp_id;
    mp->add_option("--method", mp_methods, "name=dir, repeatable, in method order")->required();
    mp->add_option("--images", mp_images, "Image ids (default: stems in the first method dir)");
    mp->add_option("--study-id", mp_id, "Study identifier");
    mp->add_option("--out", mp_out, "Output manifest JSON")->required();
    add_common(mp);
    auto* ma = mor->add_subcommand("aggregate", "Aggregate rank CSV into MOR per method");
    std::string ma_ranks, ma_out, ma_manifest;
    ma->add_option("--ranks", ma_ranks, "Rank CSV (participant,image,method,rank)")->required();
    ma->add_option("--manifest", ma_manifest, "Study manifest fixing the method list");
    ma->add_option("--out", ma_out, "Optional output CSV method,mor,records");
    add_common(ma);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
      app.parse(rev);
    } catch (const CLI::CallForHelp&) {
      io_.out << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      io_.out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      io_.err << "error: " << e.what() << "\n";
      auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
      io_.err << sub->help();
      return kExitValidation;
    }

    try {
      if (*bk) return build_kernels(bk_out, bk_count, bk_size);
      if (*hn) return harvest_noise(hn_src, hn_out);
      if (*dg) return degrade(dg_hq, dg_k, dg_n, dg_out, dg_no_noise);
      if (*cs) return corrupt(cs_hq, cs_k, cs_out, cs_sigma, cs_quality, cs_scale);
      if (*ev) return evaluate(ev_sr, ev_gt, ev_out, ev_nr, ev_fx);
      if (*mp) return mor_prepare(mp_methods, mp_images, mp_id, mp_out);
      if (*ma) return mor_aggregate(ma_ranks, ma_manifest, ma_out);
    } catch (const IoError& e) {
      io_.err << "error: " << e.what() << "\n";
      return kExitIo;
    } catch (const fs::filesystem_error& e) {
      io_.err << "error: " << e.what() << "\n";
      return kExitIo;
    } catch (const std::exception& e) {
      io_.err << "error: " << e.what() << "\n";
      return kExitValidation;
    }
    return kExitValidation;
  }

 private:
  void add_common(CLI::App* sub) {
    sub->add_option("--config", common_.config_path, "Pipeline config JSON");
    sub->add_option("--seed", common_.seed, "Global seed (default 0)");
    sub->add_option("--jobs", common_.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--verbose,-v", common_.verbose, "Progress on standard error");
  }

  PipelineConfig config() {
    PipelineConfig cfg;
    if (!common_.config_path.empty()) {
      cfg = load_pipeline_config(common_.config_path);
      config_text_ = std::string();
      const auto bytes = read_file_bytes(common_.config_path);
      config_text_->assign(bytes.begin(), bytes.end());
    }
    if (common_.seed) cfg.degradation.global_seed = *common_.seed;
    return cfg;
  }

  nlohmann::json config_echo(const PipelineConfig& cfg) const {
    nlohmann::json j = to_json(cfg);
    if (config_text_) {
      try {
        j["config_file"] = nlohmann::json::parse(*config_text_);
      } catch (const nlohmann::json::exception&) {
      }
    }
    return j;
  }

  Logger logger() {
    return [this](const std::string& m) {
      if (common_.verbose || m.starts_with("warning")) io_.err << m << "\n";
    };
  }

  int build_kernels(const std::string& out, std::optional<int> count, std::optional<int> size) {
    auto cfg = config();
    if (count) cfg.kernels.count = *count;
    if (size) cfg.kernels.size = *size;
    Rng rng(StableHash().u64(cfg.degradation.global_seed).bytes("kernels").digest());
    const auto pool = synthesize_kernel_pool(cfg.kernels, rng);
    save_kernel_pool(pool, out);
    logger()("wrote " + std::to_string(pool.size()) + " kernels to " + out);
    return kExitOk;
  }

  int harvest_noise(const std::string& src, const std::string& out) {
    const auto cfg = config();
    const auto files = list_images(src);
    if (files.empty()) throw IoError("no images found in " + src);
    std::vector<std::vector<NoisePatch>> found(files.size());
    auto log = logger();
    std::mutex mu;
    parallel_for(files.size(), common_.jobs, [&](std::size_t i) {
      Image img;
      try {
        img = load_image(files[i]);
      } catch (const IoError& e) {
        std::lock_guard lock(mu);
        log(std::string("warning: skipping ") + e.what());
        return;
      }
      found[i] = scan_noise_patches(img, cfg.noise_scan);
      std::lock_guard lock(mu);
      log(files[i].filename().string() + ": " + std::to_string(found[i].size()) + " patches");
    });
    NoisePool pool;
    for (auto& f : found) pool.append(std::move(f));
    save_noise_pool(pool, out);
    io_.err << "harvested " << pool.size() << " noise patches\n";
    return kExitOk;
  }

  int degrade(const std::string& hq, const std::string& kernels, const std::string& noise,
              const std::string& out, bool no_noise) {
    auto cfg = config();
    if (no_noise) cfg.degradation.noise_enabled = false;
    cfg.degradation.validate();
    const auto kpool = load_kernel_pool(kernels);
    NoisePool npool;
    nlohmann::json pools = {{"kernels", {{"path", kernels}, {"fnv1a64", file_fingerprint(kernels)}}}};
    if (cfg.degradation.noise_enabled) {
      if (noise.empty()) throw ArgumentError("degrade: --noise is required unless --no-noise is set");
      npool = load_noise_pool(noise);
      pools["noise"] = {{"path", noise}, {"fnv1a64", file_fingerprint(noise)}};
    }
    nlohmann::json extra = {{"config", config_echo(cfg)}, {"pools", pools}};
    const auto manifest =
        generate_pairs(hq, kpool, npool, cfg.degradation, out, common_.jobs, extra, logger());
    io_.err << "wrote " << manifest.pairs.size() << " pairs to " << out << "\n";
    return kExitOk;
  }

  int corrupt(const std::string& hq, const std::string& kernels, const std::string& out,
              double sigma, int quality, std::optional<int> scale) {
    auto cfg = config();
    const int s = scale.value_or(cfg.degradation.scale);
    if (s < 1) throw ArgumentError("corrupt-synthetic: scale must be >= 1");
    const auto kpool = load_kernel_pool(kernels);
    const auto files = list_images(hq);
    if (files.empty()) throw IoError("no images found in " + hq);
    fs::create_directories(out);
    auto log = logger();
    std::mutex mu;
    std::vector<nlohmann::json> entries(files.size());
    parallel_for(files.size(), common_.jobs, [&](std::size_t i) {
      const std::string rel = files[i].filename().generic_string();
      Image hr;
      try {
        hr = load_image(files[i]);
      } catch (const IoError& e) {
        std::lock_guard lock(mu);
        log(std::string("warning: skipping ") + e.what());
        entries[i] = {{"source_path", rel}, {"skipped", e.what()}};
        return;
      }
      hr = crop_to_multiple(hr, s);
      const auto seed = derive_seed(cfg.degradation.global_seed, rel, 1.0);
      Rng rng(seed);
      const Image lr = synthetic_corrupt(hr, kpool, s, sigma, quality, rng);
      const std::string stem = files[i].stem().string();
      save_png(hr, fs::path(out) / (stem + "_hr.png"));
      save_png(lr, fs::path(out) / (stem + "_lr.png"));
      entries[i] = {{"source_path", rel}, {"derived_seed", seed},
                    {"hr_file", stem + "_hr.png"}, {"lr_file", stem + "_lr.png"}};
    });
    nlohmann::json manifest = {{"config", config_echo(cfg)},
                               {"scale", s},
                               {"sigma", sigma},
                               {"jpeg_quality", quality},
                               {"kernels", {{"path", kernels}, {"fnv1a64", file_fingerprint(kernels)}}},
                               {"images", entries}};
    write_file_atomic(fs::path(out) / "manifest.json", manifest.dump(2) + "\n");
    return kExitOk;
  }

  static std::map<std::string, std::pair<double, double>> read_nr_scores(const std::string& path) {
    const auto bytes = read_file_bytes(path);
    std::istringstream in(std::string(bytes.begin(), bytes.end()));
    std::string line;
    std::map<std::string, std::pair<double, double>> out;
    int lineno = 0;
    int ci = -1, cn = -1, cq = -1;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      auto f = detail::split_csv_line(line, lineno);
      if (ci < 0) {
        for (int k = 0; k < static_cast<int>(f.size()); ++k) {
          if (f[k] == "image") ci = k;
          if (f[k] == "niqe") cn = k;
          if (f[k] == "nrqm") cq = k;
        }
        if (ci < 0 || cn < 0 || cq < 0) {
          throw ParseError(path + ":1: expected columns image,niqe,nrqm");
        }
        continue;
      }
      const int need = std::max({ci, cn, cq});
      if (static_cast<int>(f.size()) <= need) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": too few fields");
      }
      try {
        out[fs::path(f[ci]).stem().string()] = {std::stod(f[cn]), std::stod(f[cq])};
      } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": non-numeric score");
      }
    }
    return out;
  }

  int evaluate(const std::string& sr_dir, const std::string& gt_dir, const std::string& out,
               const std::string& nr_path, const std::string& fx_path) {
    (void)config();
    const auto sr_files = list_images(sr_dir);
    std::map<std::string, fs::path> gt;
    for (const auto& p : list_images(gt_dir)) gt.emplace(p.stem().string(), p);
    auto log = logger();
    std::vector<std::pair<fs::path, fs::path>> pairs;
    for (const auto& p : sr_files) {
      auto it = gt.find(p.stem().string());
      if (it == gt.end()) {
        log("warning: no ground truth for " + p.filename().string());
        continue;
      }
      pairs.emplace_back(p, it->second);
    }
    if (pairs.empty()) throw IoError("evaluate: no SR/GT pairs matched by file stem");

    std::optional<ConvFeatureExtractor> loaded;
    if (!fx_path.empty()) loaded = load_conv_extractor(fx_path);
    const auto fx_gray = make_random_conv_extractor(1);
    const auto fx_rgb = make_random_conv_extractor(3);

    std::map<std::string, std::pair<double, double>> nr;
    const bool with_pi = !nr_path.empty();
    if (with_pi) nr = read_nr_scores(nr_path);

    std::vector<std::string> names = {"psnr", "ssim", "ms_ssim", "nlpd", "lpips"};
    if (with_pi) names.insert(names.end(), {"niqe", "nrqm", "pi"});
    std::vector<std::map<std::string, double>> rows(pairs.size());
    std::mutex mu;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    parallel_for(pairs.size(), common_.jobs, [&](std::size_t i) {
      const Image a = load_image(pairs[i].first);
      const Image b = load_image(pairs[i].second);
      require_same_shape(a, b, ("evaluate " + pairs[i].first.filename().string()).c_str());
      auto& r = rows[i];
      r["psnr"] = psnr(a, b);
      const bool big = std::min(a.height(), a.width()) >= SsimConstants::kWindow;
      r["ssim"] = big ? ssim(a, b) : nan;
      const int scales = ms_ssim_max_scales(a.height(), a.width());
      r["ms_ssim"] = scales > 0 ? ms_ssim(a, b, scales) : nan;
      r["nlpd"] = nlpd(a, b);
      const FeatureExtractor& fx =
          loaded ? static_cast<const FeatureExtractor&>(*loaded)
                 : (a.channels() == 3 ? static_cast<const FeatureExtractor&>(fx_rgb) : fx_gray);
      r["lpips"] = lpips(a, b, fx);
      if (!big) {
        std::lock_guard lock(mu);
        log("warning: " + pairs[i].first.filename().string() + " is smaller than the SSIM window");
      }
      if (with_pi) {
        auto it = nr.find(pairs[i].first.stem().string());
        if (it == nr.end()) {
          std::lock_guard lock(mu);
          log("warning: no NIQE/NRQM scores for " + pairs[i].first.filename().string());
          r["niqe"] = r["nrqm"] = r["pi"] = nan;
        } else {
          r["niqe"] = it->second.first;
          r["nrqm"] = it->second.second;
          r["pi"] = perceptual_index(it->second.first, it->second.second);
        }
      }
    });

    MetricReport report(names);
    for (std::size_t i = 0; i < pairs.size(); ++i) report.add(pairs[i].first.stem().string(), rows[i]);

    std::string csv = "image";
    for (const auto& n : names) csv += "," + n;
    csv += "\n";
    for (std::size_t i = 0; i < report.images().size(); ++i) {
      csv += csv_escape(report.images()[i]);
      for (const auto& n : names) csv += "," + format_number(report.scores(n)[i]);
      csv += "\n";
    }
    csv += "mean";
    for (const auto& n : names) csv += "," + format_number(report.mean(n));
    csv += "\n";
    write_file_atomic(out, csv);
    io_.err << "evaluated " << report.images().size() << " image pairs\n";
    return kExitOk;
  }

  int mor_prepare(const std::vector<std::string>& method_specs, std::vector<std::string> images,
                  const std::string& study_id, const std::string& out) {
    const auto cfg = config();
    std::vector<MethodSource> methods;
    for (const auto& spec : method_specs) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
        throw ArgumentError("--method expects name=dir, got '" + spec + "'");
      }
      methods.push_back({spec.substr(0, eq), spec.substr(eq + 1)});
    }
    if (images.empty()) {
      for (const auto& p : list_images(methods.front().dir)) images.push_back(p.stem().string());
    }
    const auto manifest = build_study(images, methods, cfg.degradation.global_seed, study_id);
    write_file_atomic(out, manifest.serialize());
    io_.err << "study with " << manifest.items.size() << " items written to " << out << "\n";
    return kExitOk;
  }

  int mor_aggregate(const std::string& ranks, const std::string& manifest_path,
                    const std::string& out) {
    const auto bytes = read_file_bytes(ranks);
    const auto table = parse_rank_csv(std::string(bytes.begin(), bytes.end()));
    std::vector<std::string> methods = table.methods;
    if (!manifest_path.empty()) {
      const auto mb = read_file_bytes(manifest_path);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(mb.begin(), mb.end());
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(manifest_path + ": " + e.what());
      }
      methods = StudyManifest::from_json(j).methods;
    }
    const auto res = aggregate_mor(table.records, methods);
    std::string csv = "method,mor,records\n";
    for (const auto& m : methods) {
      io_.out << "MOR(" << m << ")=" << format_mor(res.mor.at(m)) << "\n";
      csv += csv_escape(m) + "," + format_mor(res.mor.at(m)) + "," +
             std::to_string(res.record_count) + "\n";
    }
    io_.out << "records=" << res.record_count << "\n";
    if (!out.empty()) write_file_atomic(out, csv);
    return kExitOk;
  }

  Streams io_;
  CommonOptions common_;
  std::optional<std::string> config_text_;
};

inline int run(const std::vector<std::string>& args, Streams io = {}) {
  return Runner(io).run(args);
}

}  // namespace rwsr::cli
