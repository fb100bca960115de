#include <gtest/gtest.h>

#include <filesystem>
#include <numbers>

#include "oracles.hpp"
#include "rwsr/kernels.hpp"

namespace fs = std::filesystem;
using rwsr::Image;
using rwsr::Kernel;

namespace {

Kernel transpose(const Kernel& k) {
  Kernel t = k;
  for (int y = 0; y < k.size; ++y)
    for (int x = 0; x < k.size; ++x) t.at(y, x) = k.at(x, y);
  return t;
}

double max_diff(const Kernel& a, const Kernel& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.weights.size(); ++i)
    m = std::max(m, std::abs(a.weights[i] - b.weights[i]));
  return m;
}

}  // namespace

TEST(GaussianKernel, DegenerateSize) {
  const Kernel k = rwsr::gaussian_aniso_kernel(1.0, 2.0, 0.3, 1);
  ASSERT_EQ(k.size, 1);
  EXPECT_EQ(k.weights[0], 1.0);
}

TEST(GaussianKernel, IsotropicIsSymmetric) {
  const Kernel k = rwsr::gaussian_aniso_kernel(1.7, 1.7, 0.0, 9);
  EXPECT_LT(max_diff(k, transpose(k)), 1e-9);
}

TEST(GaussianKernel, QuarterTurnSwapsAxes) {
  const Kernel rotated = rwsr::gaussian_aniso_kernel(2.0, 0.5, std::numbers::pi / 2, 11);
  const Kernel swapped = rwsr::gaussian_aniso_kernel(0.5, 2.0, 0.0, 11);
  const Kernel upright = rwsr::gaussian_aniso_kernel(2.0, 0.5, 0.0, 11);
  EXPECT_LT(max_diff(rotated, swapped), 1e-12);
  EXPECT_LT(max_diff(rotated, transpose(upright)), 1e-12);
  EXPECT_GT(max_diff(rotated, upright), 1e-3);
}

TEST(GaussianKernel, MatchesCovarianceOracle) {
  for (double theta : {0.0, 0.4, 1.1, 2.7}) {
    const Kernel k = rwsr::gaussian_aniso_kernel(2.3, 0.8, theta, 11);
    const auto want = oracle::gaussian_kernel(2.3, 0.8, theta, 11);
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(k.weights[i], want[i], 1e-12);
  }
}

TEST(GaussianKernel, PoolInvariants) {
  rwsr::Rng rng(17);
  const auto pool = rwsr::synthesize_kernel_pool({}, rng);
  ASSERT_EQ(pool.size(), 64u);
  for (const auto& k : pool.kernels) {
    EXPECT_EQ(k.size, 11);
    EXPECT_NEAR(k.sum(), 1.0, 1e-6);
    for (double w : k.weights) EXPECT_GE(w, 0.0);
  }
  // theta -> theta + pi
  for (double theta : {0.2, 0.9, 1.6}) {
    const Kernel a = rwsr::gaussian_aniso_kernel(2.5, 0.7, theta, 11);
    const Kernel b = rwsr::gaussian_aniso_kernel(2.5, 0.7, theta + std::numbers::pi, 11);
    EXPECT_LT(max_diff(a, b), 1e-12);
  }
}

TEST(GaussianKernel, RejectsBadArguments) {
  EXPECT_THROW(rwsr::gaussian_aniso_kernel(1, 1, 0, 4), rwsr::ArgumentError);
  EXPECT_THROW(rwsr::gaussian_aniso_kernel(1, 1, 0, 0), rwsr::ArgumentError);
  EXPECT_THROW(rwsr::gaussian_aniso_kernel(0, 1, 0, 3), rwsr::ArgumentError);
  EXPECT_THROW(rwsr::gaussian_aniso_kernel(1, -1, 0, 3), rwsr::ArgumentError);
}

TEST(Downsample, DeltaKernelIsPlainSubsampling) {
  const Image img = oracle::uniform_noise(23, 18, 3, 4);
  const Image out = rwsr::downsample(img, Kernel::delta(11), 4);
  ASSERT_EQ(out.height(), 6);
  ASSERT_EQ(out.width(), 5);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < out.height(); ++y)
      for (int x = 0; x < out.width(); ++x) ASSERT_EQ(out.at(c, y, x), img.at(c, 4 * y, 4 * x));
}

TEST(Downsample, ConstantImageStaysConstant) {
  const Image img(16, 16, 3, 0.42f);
  const Kernel k = rwsr::gaussian_aniso_kernel(2.0, 1.0, 0.5, 7);
  for (int s : {1, 2, 3, 4}) {
    const Image out = rwsr::downsample(img, k, s);
    for (float v : out.data()) EXPECT_NEAR(v, 0.42f, 1e-6);
  }
}

TEST(Downsample, BoxKernelMatchesTripleLoop) {
  Kernel box{3, std::vector<double>(9, 1.0 / 9.0)};
  const Image img = oracle::uniform_noise(8, 8, 1, 21);
  const Image out = rwsr::downsample(img, box, 2);
  const Image want = oracle::downsample(img, box, 2);
  ASSERT_TRUE(out.same_shape(want));
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out.data()[i], want.data()[i], 1e-7);
}

TEST(Downsample, AnisotropicKernelMatchesTripleLoop) {
  const Kernel k = rwsr::gaussian_aniso_kernel(2.1, 0.9, 0.7, 11);
  const Image img = oracle::textured(33, 29, 3, 2);
  const Image out = rwsr::downsample(img, k, 4);
  const Image want = oracle::downsample(img, k, 4);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out.data()[i], want.data()[i], 1e-6);
}

TEST(Downsample, MeanIsPreservedOnConstantPaddedImages) {
  Image img(40, 40, 1, 0.3f);
  const Kernel k = rwsr::gaussian_aniso_kernel(1.5, 1.5, 0, 5);
  const Image out = rwsr::downsample(img, k, 2);
  double m = 0;
  for (float v : out.data()) m += v;
  EXPECT_NEAR(m / out.size(), 0.3, 0.01);
}

TEST(Downsample, RejectsImageSmallerThanKernel) {
  EXPECT_THROW(rwsr::downsample(Image(5, 20, 1), Kernel::delta(7), 2), rwsr::ArgumentError);
}

TEST(KernelFile, RoundTrip) {
  const auto dir = fs::temp_directory_path() / "rwsr_kernel_rt";
  fs::create_directories(dir);
  const Kernel k = rwsr::gaussian_aniso_kernel(1.9, 0.6, 0.8, 11);
  rwsr::save_kernel(k, dir / "k.txt");
  const auto loaded = rwsr::load_kernel(dir / "k.txt");
  EXPECT_LT(max_diff(loaded.kernel, k), 1e-9);
  EXPECT_FALSE(loaded.renormalized);
}

TEST(KernelFile, RenormalizesAndFlags) {
  const auto k = rwsr::parse_kernel(
      "# estimated externally\n"
      "KERN1 3\n"
      "0 0 0\n"
      "0.24 0.5 0.24\n"
      "0 0 0\n");
  EXPECT_NEAR(k.raw_sum, 0.98, 1e-12);
  EXPECT_TRUE(k.renormalized);
  EXPECT_NEAR(k.kernel.sum(), 1.0, 1e-12);
  EXPECT_NEAR(k.kernel.at(1, 1), 0.5 / 0.98, 1e-12);
}

TEST(KernelFile, SmallDriftIsNotFlagged) {
  const auto k = rwsr::parse_kernel("KERN1 1\n1.0005\n");
  EXPECT_FALSE(k.renormalized);
  EXPECT_DOUBLE_EQ(k.kernel.weights[0], 1.0);
}

TEST(KernelFile, MalformedInputsReportLineNumbers) {
  auto expect_parse_error = [](const std::string& text, const std::string& fragment) {
    try {
      rwsr::parse_kernel(text, "k");
      ADD_FAILURE() << "no error for: " << text;
    } catch (const rwsr::ParseError& e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
  };
  // 3x3 declared, 8 values present
  expect_parse_error("KERN1 3\n1 1 1\n1 1 1\n1 1\n", "k:4:");
  expect_parse_error("KERN1 3\n1 1 1\n1 1 1\n", "k:4:");
  expect_parse_error("KERNEL 3\n", "k:1:");
  expect_parse_error("KERN1 2\n1 1\n1 1\n", "k:1:");
  expect_parse_error("KERN1 1\nnan\n", "k:2:");
  expect_parse_error("KERN1 1\n0x\n", "k:2:");
  expect_parse_error("# only comments\n", "missing");
  expect_parse_error("KERN1 1\n0\n", "sum to zero");
}

TEST(KernelFile, PoolRoundTrip) {
  const auto dir = fs::temp_directory_path() / "rwsr_kernel_pool";
  fs::create_directories(dir);
  rwsr::Rng rng(3);
  const auto pool = rwsr::synthesize_kernel_pool({.count = 5, .size = 7}, rng);
  rwsr::save_kernel_pool(pool, dir / "k.pool");
  const auto back = rwsr::load_kernel_pool(dir / "k.pool");
  ASSERT_EQ(back.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_LT(max_diff(back[i], pool[i]), 1e-9);
}
