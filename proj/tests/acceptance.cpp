// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rwsr/cli.hpp"
#include "rwsr/rwsr.hpp"

namespace fs = std::filesystem;
using rwsr::Image;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      if (ok) detail = what;
      ok = false;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::map<std::string, std::vector<std::uint8_t>> read_tree(const fs::path& dir) {
  std::map<std::string, std::vector<std::uint8_t>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = rwsr::read_file_bytes(e.path());
  return out;
}

int cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  return rwsr::cli::run(args, {out, err});
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("rwsr_accept_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// ---------------------------------------------------------------- criteria

Check perceptual_index_table() {
  struct Row {
    const char* method;
    double niqe, nrqm, pi;
  };
  const Row rows[] = {
      {"Bicubic", 5.77, 3.09, 6.34}, {"MZSR", 7.36, 3.75, 6.81},   {"EDSR", 5.43, 3.82, 5.81},
      {"ESRGAN", 3.75, 7.08, 3.34},  {"USRNet", 6.10, 3.19, 6.46}, {"RealSR", 3.50, 5.45, 4.00},
      {"DPSR", 5.58, 3.38, 6.10},    {"Ours", 4.56, 7.62, 3.47},
  };
  const auto t0 = Clock::now();
  Check c;
  for (const auto& r : rows) {
    const double got = rwsr::perceptual_index(r.niqe, r.nrqm);
    c.require(std::abs(got - r.pi) <= 0.005, std::string(r.method) + ": computed " +
                                                 fmt("%.4f", got) + ", table " + fmt("%.2f", r.pi));
  }
  c.require(seconds_since(t0) < 1.0, "runtime over 1 s");
  return c;
}

Check degradation_determinism() {
  const auto t0 = Clock::now();
  Check c;
  const auto root = scratch("determinism");
  fs::create_directories(root / "hq");
  fs::create_directories(root / "src");
  for (int i = 0; i < 20; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "face%02d.png", i);
    rwsr::save_png(oracle::textured(64 + 4 * (i % 5), 72 - 4 * (i % 3), 3, 100 + i), root / "hq" / name);
  }
  for (int i = 0; i < 3; ++i)
    rwsr::save_png(oracle::flat_noisy(256, 256, 3, 120, 2.0, 40 + i),
                   root / "src" / ("flat" + std::to_string(i) + ".png"));
  c.require(cli({"build-kernels", "--out", (root / "k.pool").string(), "--seed", "5"}) == 0, "build-kernels failed");
  c.require(cli({"harvest-noise", "--src", (root / "src").string(), "--out", (root / "n.pool").string()}) == 0,
            "harvest-noise failed");
  if (!c.ok) return c;
  auto degrade = [&](const std::string& out, int jobs) {
    return cli({"degrade", "--hq", (root / "hq").string(), "--kernels", (root / "k.pool").string(),
                "--noise", (root / "n.pool").string(), "--out", (root / out).string(), "--seed", "2024",
                "--jobs", std::to_string(jobs)});
  };
  c.require(degrade("run1", 1) == 0, "degrade run1 failed");
  c.require(degrade("run2", 1) == 0, "degrade run2 failed");
  c.require(degrade("run8", 8) == 0, "degrade --jobs 8 failed");
  if (!c.ok) return c;
  const auto a = read_tree(root / "run1");
  c.require(a.size() == 20 * 4 * 2 + 1, "unexpected file count " + std::to_string(a.size()));
  c.require(a == read_tree(root / "run2"), "two runs differ");
  c.require(a == read_tree(root / "run8"), "--jobs 1 and --jobs 8 differ");
  c.require(seconds_since(t0) < 60.0, "runtime over 1 min");
  c.detail = c.ok ? fmt("%.1f s", seconds_since(t0)) : c.detail;
  return c;
}

Check neutral_element() {
  Check c;
  const rwsr::KernelPool kpool{{rwsr::Kernel::delta(11)}};
  rwsr::NoisePool npool;
  npool.append({rwsr::NoisePatch{32, 3, std::vector<float>(32 * 32 * 3, 0.0f)}});
  rwsr::DegradationConfig cfg;
  cfg.jpeg_probability = 0.0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const int h = 48 + 4 * static_cast<int>(i), w = 80 - 4 * static_cast<int>(i);
    const Image hr = oracle::uniform_noise(h, w, 3, 900 + i);
    rwsr::Rng rng(i);
    const Image lr = rwsr::degrade_image(hr, kpool, npool, cfg, rng).lr;
    bool exact = lr.height() == h / 4 && lr.width() == w / 4;
    for (int ch = 0; exact && ch < 3; ++ch)
      for (int y = 0; y < lr.height(); ++y)
        for (int x = 0; x < lr.width(); ++x) exact = exact && lr.at(ch, y, x) == hr.at(ch, 4 * y, 4 * x);
    c.require(exact, "image " + std::to_string(i) + " differs from stride-4 subsample");
  }
  return c;
}

Check noise_pool_soundness() {
  Check c;
  const rwsr::NoiseScanParams params;
  std::size_t harvested = 0;
  for (std::uint64_t s = 0; s < 4; ++s) {
    const Image img = oracle::flat_noisy(256, 256, 3, 120, 2.0, 70 + s);
    const auto hits = rwsr::find_smooth_windows(img, params);
    const auto patches = rwsr::scan_noise_patches(img, params);
    c.require(hits.size() == patches.size(), "hit/patch count mismatch");
    const auto luma = oracle::gray_grid(img);
    for (std::size_t k = 0; k < patches.size(); ++k) {
      for (int ch = 0; ch < 3; ++ch)
        c.require(std::abs(patches[k].channel_mean(ch)) <= 1e-6, "patch mean not zero");
      c.require(oracle::smooth(luma, hits[k].top, hits[k].left, params.patch_size, params.sub_size,
                               params.mu, params.gamma, params.phi),
                "source window fails the smoothness tests on re-check");
    }
    harvested += patches.size();
  }
  c.require(harvested > 0, "no patches harvested from the flat+noise corpus");
  for (float level : {0.0f, 0.5f, 1.0f}) {
    const Image flat(256, 256, 3, level);
    c.require(rwsr::scan_noise_patches(flat, params).empty(), "constant image produced patches");
  }
  if (c.ok) c.detail = std::to_string(harvested) + " patches";
  return c;
}

Check synthetic_noise_sigma() {
  Check c;
  const Image flat(128, 128, 3, 0.5f);
  rwsr::Rng rng(8);
  const Image noisy = rwsr::add_gaussian_noise(flat, 8.0, rng);
  double s = 0, s2 = 0;
  for (float v : noisy.data()) s += v;
  const double n = static_cast<double>(noisy.size()), mean = s / n;
  for (float v : noisy.data()) s2 += (v - mean) * (v - mean);
  const double sd = std::sqrt(s2 / (n - 1));
  const double want = 8.0 / 255.0;
  c.require(std::abs(sd - want) <= 0.05 * want, "sigma " + fmt("%.6f", sd));
  c.detail = "sigma*255 = " + fmt("%.4f", sd * 255);
  return c;
}

Check metric_oracles() {
  const auto t0 = Clock::now();
  Check c;
  rwsr::Rng rng(2);
  const rwsr::IdentityExtractor fx_id(3);
  const auto fx_conv = rwsr::make_random_conv_extractor(3);
  for (int i = 0; i < 50; ++i) {
    const int h = 22 + static_cast<int>(rng.index(50)), w = 22 + static_cast<int>(rng.index(50));
    const Image a = oracle::textured(h, w, 3, 1000 + i);
    const Image b = oracle::perturbed(a, 0.05 + 0.5 * rng.uniform(), 2000 + i);
    const std::string tag = " (pair " + std::to_string(i) + ")";
    c.require(std::abs(rwsr::psnr(a, b) - oracle::psnr(a, b)) <= 1e-9, "psnr" + tag);
    const auto ga = oracle::gray_grid(a), gb = oracle::gray_grid(b);
    c.require(std::abs(rwsr::ssim(a, b) - oracle::ssim(ga, gb).ssim) <= 1e-6, "ssim" + tag);
    const int scales = rwsr::ms_ssim_max_scales(h, w);
    c.require(std::abs(rwsr::ms_ssim(a, b, scales) - oracle::ms_ssim(a, b, scales)) <= 1e-5, "ms_ssim" + tag);
    c.require(std::abs(rwsr::nlpd(a, b) - oracle::nlpd(a, b)) <= 1e-6, "nlpd" + tag);
    c.require(std::abs(rwsr::lpips(a, b, fx_id) - oracle::lpips_identity(a, b)) <= 1e-7, "lpips" + tag);

    c.require(rwsr::psnr(a, a) == std::numeric_limits<double>::infinity(), "psnr reflexivity" + tag);
    c.require(rwsr::ssim(a, a) == 1.0, "ssim reflexivity" + tag);
    c.require(rwsr::ms_ssim(a, a, scales) == 1.0, "ms_ssim reflexivity" + tag);
    c.require(rwsr::nlpd(a, a) == 0.0, "nlpd reflexivity" + tag);
    c.require(rwsr::lpips(a, a, fx_conv) == 0.0, "lpips reflexivity" + tag);

    c.require(rwsr::psnr(a, b) == rwsr::psnr(b, a), "psnr symmetry" + tag);
    c.require(rwsr::ssim(a, b) == rwsr::ssim(b, a), "ssim symmetry" + tag);
    c.require(rwsr::ms_ssim(a, b, scales) == rwsr::ms_ssim(b, a, scales), "ms_ssim symmetry" + tag);
    c.require(rwsr::nlpd(a, b) == rwsr::nlpd(b, a), "nlpd symmetry" + tag);
    c.require(rwsr::lpips(a, b, fx_conv) == rwsr::lpips(b, a, fx_conv), "lpips symmetry" + tag);
  }
  c.require(seconds_since(t0) < 120.0, "runtime over 2 min");
  if (c.ok) c.detail = fmt("%.1f s", seconds_since(t0));
  return c;
}

Check loss_checks() {
  Check c;
  c.require(rwsr::generator_loss(1, 1, 1) == 0.016, "generator_loss(1,1,1) != 0.016");
  const double base[3] = {0.4, 1.3, 0.25}, lambdas[3] = {0.01, 0.005, 0.001};
  const double h = 1e-3;
  for (int i = 0; i < 3; ++i) {
    double up[3] = {base[0], base[1], base[2]}, dn[3] = {base[0], base[1], base[2]};
    up[i] += h;
    dn[i] -= h;
    const double g = (rwsr::generator_loss(up[0], up[1], up[2]) - rwsr::generator_loss(dn[0], dn[1], dn[2])) / (2 * h);
    c.require(std::abs(g - lambdas[i]) <= 1e-6, "gradient for component " + std::to_string(i));
  }
  rwsr::Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> f(16), r(16);
    for (double& v : f) v = 4 * rng.gaussian();
    for (double& v : r) v = 4 * rng.gaussian();
    const double shift = 20 * (rng.uniform() - 0.5);
    std::vector<double> fs = f, rs = r;
    for (double& v : fs) v += shift;
    for (double& v : rs) v += shift;
    const double l0 = rwsr::adv_gen_loss({4, 4, f}, {4, 4, r});
    const double l1 = rwsr::adv_gen_loss({4, 4, fs}, {4, 4, rs});
    c.require(std::abs(l0 - l1) <= 1e-9, "adv_gen_loss not shift invariant");
  }
  return c;
}

Check mor_correctness() {
  Check c;
  const std::vector<std::string> methods{"bicubic", "esrgan", "ours", "realsr", "usrnet"};
  rwsr::Rng rng(12);
  std::vector<rwsr::RankRecord> recs;
  for (int p = 0; p < 3; ++p)
    for (int i = 0; i < 4; ++i) {
      std::vector<int> perm{1, 2, 3, 4, 5};
      for (std::size_t k = perm.size(); k > 1; --k) std::swap(perm[k - 1], perm[rng.index(k)]);
      rwsr::RankRecord r{"p" + std::to_string(p), "img" + std::to_string(i), {}};
      for (std::size_t k = 0; k < methods.size(); ++k) r.ranks[methods[k]] = perm[k];
      recs.push_back(r);
    }
  const auto res = rwsr::aggregate_mor(recs, methods);
  double total = 0;
  for (const auto& m : methods) {
    double s = 0;
    for (const auto& r : recs) s += r.ranks.at(m);
    c.require(res.mor.at(m) == s / recs.size(), "MOR(" + m + ") differs from direct mean");
    total += res.mor.at(m);
  }
  c.require(std::abs(total - 15.0) <= 1e-12, "ranks not conserved: sum " + fmt("%.6f", total));

  auto rejects = [&](std::vector<rwsr::RankRecord> bad, const std::string& fragment) {
    try {
      rwsr::aggregate_mor(bad, methods);
      return false;
    } catch (const rwsr::ValidationError& e) {
      return std::string(e.what()).find(fragment) != std::string::npos;
    }
  };
  auto tied = recs;
  tied[5].ranks["ours"] = tied[5].ranks["esrgan"];
  c.require(rejects(tied, "participant 'p1', image 'img1'"), "tied record not rejected with location");
  auto incomplete = recs;
  incomplete[10].ranks.erase("realsr");
  c.require(rejects(incomplete, "participant 'p2', image 'img2'"), "incomplete record not rejected with location");
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"perceptual index reproduces reference table", perceptual_index_table},
      {"degradation determinism", degradation_determinism},
      {"neutral degradation is a stride-4 subsample", neutral_element},
      {"noise pool soundness", noise_pool_soundness},
      {"synthetic corruption noise sigma", synthetic_noise_sigma},
      {"metric oracle equivalence", metric_oracles},
      {"loss checks", loss_checks},
      {"MOR correctness", mor_correctness},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    try {
      c = fn();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s  %s%s%s\n", c.ok ? "PASS" : "FAIL", name.c_str(), c.detail.empty() ? "" : ": ",
                c.detail.c_str());
    std::fflush(stdout);
    failed += !c.ok;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
