#include <gtest/gtest.h>

#include <filesystem>

#include "oracles.hpp"
#include "rwsr/codec.hpp"
#include "rwsr/image.hpp"
#include "rwsr/metrics.hpp"

namespace fs = std::filesystem;
using rwsr::Image;

namespace {

fs::path temp_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("rwsr_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Image whose samples are exact multiples of 1/255.
Image random_8bit(int h, int w, int c, std::uint64_t seed) {
  rwsr::Rng rng(seed);
  Image img(h, w, c);
  for (float& v : img.data()) v = static_cast<float>(rng.index(256)) / 255.0f;
  return img;
}

}  // namespace

TEST(Image, LayoutIsPlanar) {
  Image img(2, 3, 3);
  img.at(1, 1, 2) = 0.5f;
  EXPECT_EQ(img.size(), 18u);
  EXPECT_FLOAT_EQ(img.data()[1 * 6 + 1 * 3 + 2], 0.5f);
  EXPECT_THROW(Image(2, 2, 2), rwsr::ArgumentError);
}

TEST(Codec, LoadsRgbPixel) {
  const auto dir = temp_dir("rgbpixel");
  Image img(1, 1, 3);
  img.at(0, 0, 0) = 1.0f;
  img.at(1, 0, 0) = 0.0f;
  img.at(2, 0, 0) = 128.0f / 255.0f;
  rwsr::save_png(img, dir / "p.png");
  const Image back = rwsr::load_image(dir / "p.png");
  ASSERT_EQ(back.channels(), 3);
  EXPECT_EQ(back.at(0, 0, 0), 1.0f);
  EXPECT_EQ(back.at(1, 0, 0), 0.0f);
  EXPECT_EQ(back.at(2, 0, 0), 128.0f / 255.0f);
}

TEST(Codec, LoadsGrayZeros) {
  const auto dir = temp_dir("grayzeros");
  rwsr::save_png(Image(2, 2, 1), dir / "z.png");
  const Image back = rwsr::load_image(dir / "z.png");
  EXPECT_EQ(back.channels(), 1);
  EXPECT_EQ(back.height(), 2);
  for (float v : back.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Codec, PngRoundTripIsBitExact) {
  const auto dir = temp_dir("roundtrip");
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const int c = seed % 2 ? 3 : 1;
    const Image img = random_8bit(8, 8, c, seed);
    const auto bytes = rwsr::encode_png(img);
    const Image once = rwsr::decode_png(bytes, "mem");
    ASSERT_EQ(once, img) << "seed " << seed;
    EXPECT_EQ(rwsr::encode_png(once), bytes);
  }
}

TEST(Codec, AlphaIsDropped) {
  const auto dir = temp_dir("alpha");
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = 1;
  png.height = 1;
  png.format = PNG_FORMAT_RGBA;
  const std::uint8_t px[4] = {10, 20, 30, 0};
  ASSERT_TRUE(png_image_write_to_file(&png, (dir / "a.png").c_str(), 0, px, 0, nullptr));
  const Image img = rwsr::load_image(dir / "a.png");
  ASSERT_EQ(img.channels(), 3);
  EXPECT_EQ(img.at(0, 0, 0), 10.0f / 255.0f);
  EXPECT_EQ(img.at(2, 0, 0), 30.0f / 255.0f);
}

TEST(Codec, SixteenBitPngIsRejected) {
  const auto dir = temp_dir("sixteen");
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = 2;
  png.height = 2;
  png.format = PNG_FORMAT_LINEAR_Y;
  const std::uint16_t px[4] = {0, 1000, 2000, 65535};
  ASSERT_TRUE(png_image_write_to_file(&png, (dir / "d.png").c_str(), 0, px, 0, nullptr));
  try {
    rwsr::load_image(dir / "d.png");
    FAIL() << "expected IoError";
  } catch (const rwsr::IoError& e) {
    EXPECT_NE(std::string(e.what()).find("d.png"), std::string::npos);
  }
}

TEST(Codec, UnreadableFileNamesThePath) {
  const auto dir = temp_dir("garbage");
  rwsr::write_file_atomic(dir / "junk.png", std::string("not an image"));
  try {
    rwsr::load_image(dir / "junk.png");
    FAIL();
  } catch (const rwsr::IoError& e) {
    EXPECT_NE(std::string(e.what()).find("junk.png"), std::string::npos);
  }
  EXPECT_THROW(rwsr::load_image(dir / "missing.png"), rwsr::IoError);
}

TEST(Codec, JpegPreservesDimensionsAndChannels) {
  for (int c : {1, 3}) {
    const Image img = oracle::textured(37, 53, c, 5);
    const auto bytes = rwsr::encode_jpeg(img, 30);
    const Image back = rwsr::decode_jpeg(bytes);
    EXPECT_EQ(back.height(), 37);
    EXPECT_EQ(back.width(), 53);
    EXPECT_EQ(back.channels(), c);
  }
}

TEST(Codec, JpegQualityValidation) {
  const Image img(8, 8, 3, 0.5f);
  EXPECT_THROW(rwsr::encode_jpeg(img, 0), rwsr::ArgumentError);
  EXPECT_THROW(rwsr::encode_jpeg(img, 101), rwsr::ArgumentError);
  EXPECT_NO_THROW(rwsr::encode_jpeg(img, 1));
  EXPECT_NO_THROW(rwsr::encode_jpeg(img, 100));
}

TEST(Codec, JpegQualityIsMonotone) {
  const Image img = oracle::textured(96, 96, 3, 11);
  const auto lo = rwsr::encode_jpeg(img, 10);
  const auto hi = rwsr::encode_jpeg(img, 90);
  EXPECT_LE(lo.size(), hi.size());
  EXPECT_GT(rwsr::psnr(rwsr::decode_jpeg(hi), img), rwsr::psnr(rwsr::decode_jpeg(lo), img));
}

TEST(Codec, JpegEncodingIsDeterministic) {
  const Image img = oracle::textured(40, 40, 3, 3);
  EXPECT_EQ(rwsr::encode_jpeg(img, 30), rwsr::encode_jpeg(img, 30));
}

TEST(Codec, LoadsJpegFromDisk) {
  const auto dir = temp_dir("jpegdisk");
  const Image img = oracle::textured(16, 24, 3, 1);
  rwsr::write_file_atomic(dir / "x.jpg", rwsr::encode_jpeg(img, 95));
  const Image back = rwsr::load_image(dir / "x.jpg");
  EXPECT_EQ(back.width(), 24);
  EXPECT_GT(rwsr::psnr(back, img), 30.0);
}

TEST(Resize, UnitScaleIsIdentity) {
  const Image img = oracle::uniform_noise(9, 13, 3, 2);
  const Image out = rwsr::bicubic_resize(img, 1.0);
  ASSERT_TRUE(out.same_shape(img));
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(out.data()[i], img.data()[i], 1e-6);
}

TEST(Resize, ConstantImageStaysConstant) {
  const Image img(20, 30, 1, 0.37f);
  for (double s : {0.25, 0.5, 0.75, 1.3, 2.0}) {
    const Image out = rwsr::bicubic_resize(img, s);
    for (float v : out.data()) EXPECT_NEAR(v, 0.37f, 1e-6) << "scale " << s;
  }
}

TEST(Resize, RampHalfMatchesDirectEvaluation) {
  Image ramp(8, 8, 1);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) ramp.at(0, y, x) = static_cast<float>((x + 2 * y) / 21.0);
  const Image out = rwsr::bicubic_resize(ramp, 0.5);
  ASSERT_EQ(out.height(), 4);
  ASSERT_EQ(out.width(), 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x)
      EXPECT_NEAR(out.at(0, y, x), oracle::bicubic_at(ramp, 0, y, x, 0.5), 1e-6);
}

TEST(Resize, RandomScalesMatchDirectEvaluation) {
  const Image img = oracle::uniform_noise(17, 11, 3, 9);
  for (double s : {0.25, 0.75, 1.7}) {
    const Image out = rwsr::bicubic_resize(img, s);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
          ASSERT_NEAR(out.at(c, y, x), oracle::bicubic_at(img, c, y, x, s), 1e-6);
  }
}

TEST(Resize, RejectsBadScale) {
  const Image img(4, 4, 1);
  EXPECT_THROW(rwsr::bicubic_resize(img, 0.0), rwsr::ArgumentError);
  EXPECT_THROW(rwsr::bicubic_resize(img, -1.0), rwsr::ArgumentError);
  EXPECT_THROW(rwsr::bicubic_resize(img, 0.01), rwsr::ArgumentError);
}

TEST(Gray, Coefficients) {
  Image white(1, 1, 3, 1.0f);
  EXPECT_NEAR(rwsr::to_gray(white).at(0, 0, 0), 1.0f, 1e-7);
  Image red(1, 1, 3);
  red.at(0, 0, 0) = 1.0f;
  EXPECT_NEAR(rwsr::to_gray(red).at(0, 0, 0), 0.299f, 1e-7);
}

TEST(Gray, PassThroughAndOracle) {
  const Image g = oracle::uniform_noise(5, 5, 1, 4);
  EXPECT_EQ(rwsr::to_gray(g), g);
  const Image rgb = oracle::uniform_noise(16, 16, 3, 8);
  const Image y = rwsr::to_gray(rgb);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) {
      const double want = 0.299 * rgb.at(0, r, c) + 0.587 * rgb.at(1, r, c) + 0.114 * rgb.at(2, r, c);
      EXPECT_NEAR(y.at(0, r, c), want, 1e-7);
    }
}

TEST(Codec, Quantize8MatchesPngRoundTrip) {
  const Image img = oracle::uniform_noise(6, 7, 3, 12);
  EXPECT_EQ(rwsr::quantize8(img), rwsr::decode_png(rwsr::encode_png(img), "mem"));
}
