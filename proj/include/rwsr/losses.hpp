#pragma once

// Forward values of the generator training losses and their weighted sum.
// Gradients are left to whatever framework consumes these.

#include <cmath>
#include <string>
#include <vector>

#include "rwsr/error.hpp"
#include "rwsr/image.hpp"

namespace rwsr {

struct LossWeights {
  double lambda_pix = 0.01;
  double lambda_adv = 0.005;
  double lambda_lpips = 0.001;
};

// Discriminator logits, one per image patch, row-major.
class PatchLogitGrid {
 public:
  PatchLogitGrid(int rows, int cols, std::vector<double> logits)
      : rows_(rows), cols_(cols), logits_(std::move(logits)) {
    if (rows < 1 || cols < 1) throw ArgumentError("PatchLogitGrid: grid must be non-empty");
    if (logits_.size() != static_cast<std::size_t>(rows) * cols) {
      throw ArgumentError("PatchLogitGrid: expected " + std::to_string(rows * cols) + " logits");
    }
    for (double v : logits_)
      if (!std::isfinite(v)) throw ArgumentError("PatchLogitGrid: non-finite logit");
  }

  static PatchLogitGrid filled(int rows, int cols, double v) {
    return {rows, cols, std::vector<double>(static_cast<std::size_t>(rows) * cols, v)};
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const std::vector<double>& values() const { return logits_; }

  double mean() const {
    double s = 0.0;
    for (double v : logits_) s += v;
    return s / static_cast<double>(logits_.size());
  }

 private:
  int rows_;
  int cols_;
  std::vector<double> logits_;
};

// ln(1 + e^x) without overflow for large |x|.
inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

// L1: mean absolute difference over all samples.
inline double pixel_loss(const Image& gen, const Image& gt) {
  require_same_shape(gen, gt, "pixel_loss");
  if (gen.empty()) throw ArgumentError("pixel_loss: empty image");
  auto a = gen.data(), b = gt.data();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(static_cast<double>(a[i]) - b[i]);
  return s / static_cast<double>(a.size());
}

// Relativistic-average generator loss:
//   mean_p softplus(-(fake_p - mean(real))) + softplus(real_p - mean(fake))
inline double adv_gen_loss(const PatchLogitGrid& fake, const PatchLogitGrid& real) {
  if (fake.rows() != real.rows() || fake.cols() != real.cols()) {
    throw ArgumentError("adv_gen_loss: grid shape mismatch");
  }
  const double mean_fake = fake.mean(), mean_real = real.mean();
  const auto& f = fake.values();
  const auto& r = real.values();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    s += softplus(-(f[i] - mean_real)) + softplus(r[i] - mean_fake);
  }
  return s / static_cast<double>(f.size());
}

inline double generator_loss(double l_pix, double l_adv, double l_lpips,
                             const LossWeights& w = {}) {
  if (!std::isfinite(l_pix) || !std::isfinite(l_adv) || !std::isfinite(l_lpips)) {
    throw ArgumentError("generator_loss: non-finite component");
  }
  if (!(w.lambda_pix >= 0.0 && w.lambda_adv >= 0.0 && w.lambda_lpips >= 0.0)) {
    throw ArgumentError("generator_loss: weights must be >= 0");
  }
  return w.lambda_pix * l_pix + w.lambda_adv * l_adv + w.lambda_lpips * l_lpips;
}

}  // namespace rwsr
