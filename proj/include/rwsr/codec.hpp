#pragma once

// PNG and baseline JPEG I/O. 8-bit only at this boundary; v/255 mapping.

#include <png.h>

#include <csetjmp>
#include <cstdio>
// jpeglib.h needs size_t and FILE declared first.
#include <jpeglib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rwsr/error.hpp"
#include "rwsr/image.hpp"

namespace rwsr {

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

// Writes to a sibling temp file and renames, so readers never see a partial
// file.
inline void write_file_atomic(const std::filesystem::path& path,
                              std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed for " + path.string() + ": " + ec.message());
}

inline void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline std::uint8_t to_u8(float v) {
  const float c = std::clamp(v, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

// Snap every sample to the value an 8-bit save/load round trip yields.
inline Image quantize8(Image img) {
  for (float& v : img.data()) v = to_u8(v) / 255.0f;
  return img;
}

// Interleaved 8-bit samples (HWC).
inline std::vector<std::uint8_t> to_interleaved_u8(const Image& img) {
  const int c = img.channels();
  std::vector<std::uint8_t> out(img.size());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int k = 0; k < c; ++k)
        out[(static_cast<std::size_t>(y) * img.width() + x) * c + k] = to_u8(img.at(k, y, x));
  return out;
}

// stride = samples per pixel in the source buffer; the first `channels` are kept.
inline Image from_interleaved_u8(const std::uint8_t* data, int height, int width, int channels,
                                 int stride) {
  Image img(height, width, channels);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int k = 0; k < channels; ++k)
        img.at(k, y, x) = data[(static_cast<std::size_t>(y) * width + x) * stride + k] / 255.0f;
  return img;
}

// ---------------------------------------------------------------- PNG

inline Image decode_png(std::span<const std::uint8_t> bytes, const std::string& name) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw IoError("PNG decode error in " + name + ": " + png.message);
  }
  if (png.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&png);
    throw IoError("PNG decode error in " + name + ": 16-bit images are not supported");
  }
  const bool color = png.format & PNG_FORMAT_FLAG_COLOR;
  const bool alpha = png.format & PNG_FORMAT_FLAG_ALPHA;
  // Alpha is read and discarded rather than composited.
  png.format = color ? (alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB)
                     : (alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY);
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw IoError("PNG decode error in " + name + ": " + msg);
  }
  const int channels = color ? 3 : 1;
  const int stride = channels + (alpha ? 1 : 0);
  return from_interleaved_u8(buf.data(), static_cast<int>(png.height),
                             static_cast<int>(png.width), channels, stride);
}

inline std::vector<std::uint8_t> encode_png(const Image& img) {
  if (img.empty()) throw ArgumentError("encode_png: empty image");
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width());
  png.height = static_cast<png_uint_32>(img.height());
  png.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const auto pixels = to_interleaved_u8(img);
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(png, size, 0, pixels.data(), 0, nullptr)) {
    throw IoError(std::string("PNG encode error: ") + png.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
    throw IoError(std::string("PNG encode error: ") + png.message);
  }
  out.resize(size);
  return out;
}

inline void save_png(const Image& img, const std::filesystem::path& path) {
  write_file_atomic(path, encode_png(img));
}

// ---------------------------------------------------------------- JPEG

namespace detail {

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

inline void jpeg_silent(j_common_ptr, int) {}

// Everything touched after setjmp lives behind this pointer, so nothing
// with a non-trivial destructor is skipped by longjmp.
struct JpegDecodeState {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  std::vector<std::uint8_t> pixels;
  int height = 0;
  int width = 0;
  int channels = 0;
};

inline bool jpeg_decode_into(JpegDecodeState* st, const std::uint8_t* data, std::size_t size) {
  st->cinfo.err = jpeg_std_error(&st->err.pub);
  st->err.pub.error_exit = jpeg_error_exit;
  st->err.pub.emit_message = jpeg_silent;
  if (setjmp(st->err.jump)) {
    jpeg_destroy_decompress(&st->cinfo);
    return false;
  }
  jpeg_create_decompress(&st->cinfo);
  jpeg_mem_src(&st->cinfo, data, static_cast<unsigned long>(size));
  jpeg_read_header(&st->cinfo, TRUE);
  if (st->cinfo.jpeg_color_space == JCS_CMYK || st->cinfo.jpeg_color_space == JCS_YCCK) {
    std::strcpy(st->err.message, "CMYK/YCCK colorspace is not supported");
    jpeg_destroy_decompress(&st->cinfo);
    return false;
  }
  const bool gray = st->cinfo.num_components == 1;
  st->cinfo.out_color_space = gray ? JCS_GRAYSCALE : JCS_RGB;
  st->cinfo.dct_method = JDCT_ISLOW;
  jpeg_start_decompress(&st->cinfo);
  st->height = static_cast<int>(st->cinfo.output_height);
  st->width = static_cast<int>(st->cinfo.output_width);
  st->channels = static_cast<int>(st->cinfo.output_components);
  const std::size_t row = static_cast<std::size_t>(st->width) * st->channels;
  st->pixels.resize(row * st->height);
  while (st->cinfo.output_scanline < st->cinfo.output_height) {
    JSAMPROW ptr = st->pixels.data() + row * st->cinfo.output_scanline;
    jpeg_read_scanlines(&st->cinfo, &ptr, 1);
  }
  jpeg_finish_decompress(&st->cinfo);
  jpeg_destroy_decompress(&st->cinfo);
  return true;
}

struct JpegEncodeState {
  jpeg_compress_struct cinfo;
  JpegErrorManager err;
  unsigned char* out = nullptr;
  unsigned long out_size = 0;
};

inline bool jpeg_encode_into(JpegEncodeState* st, const std::uint8_t* pixels, int height,
                             int width, int channels, int quality) {
  st->cinfo.err = jpeg_std_error(&st->err.pub);
  st->err.pub.error_exit = jpeg_error_exit;
  st->err.pub.emit_message = jpeg_silent;
  if (setjmp(st->err.jump)) {
    jpeg_destroy_compress(&st->cinfo);
    return false;
  }
  jpeg_create_compress(&st->cinfo);
  jpeg_mem_dest(&st->cinfo, &st->out, &st->out_size);
  st->cinfo.image_width = static_cast<JDIMENSION>(width);
  st->cinfo.image_height = static_cast<JDIMENSION>(height);
  st->cinfo.input_components = channels;
  st->cinfo.in_color_space = channels == 3 ? JCS_RGB : JCS_GRAYSCALE;
  jpeg_set_defaults(&st->cinfo);
  jpeg_set_quality(&st->cinfo, quality, TRUE);
  st->cinfo.dct_method = JDCT_ISLOW;
  st->cinfo.optimize_coding = FALSE;
  if (channels == 3) {
    // 4:2:0
    st->cinfo.comp_info[0].h_samp_factor = 2;
    st->cinfo.comp_info[0].v_samp_factor = 2;
    st->cinfo.comp_info[1].h_samp_factor = 1;
    st->cinfo.comp_info[1].v_samp_factor = 1;
    st->cinfo.comp_info[2].h_samp_factor = 1;
    st->cinfo.comp_info[2].v_samp_factor = 1;
  }
  jpeg_start_compress(&st->cinfo, TRUE);
  const std::size_t row = static_cast<std::size_t>(width) * channels;
  while (st->cinfo.next_scanline < st->cinfo.image_height) {
    auto* ptr = const_cast<JSAMPROW>(pixels + row * st->cinfo.next_scanline);
    jpeg_write_scanlines(&st->cinfo, &ptr, 1);
  }
  jpeg_finish_compress(&st->cinfo);
  jpeg_destroy_compress(&st->cinfo);
  return true;
}

}  // namespace detail

inline Image decode_jpeg(std::span<const std::uint8_t> bytes, const std::string& name = "<memory>") {
  auto st = std::make_unique<detail::JpegDecodeState>();
  if (!detail::jpeg_decode_into(st.get(), bytes.data(), bytes.size())) {
    throw IoError("JPEG decode error in " + name + ": " + st->err.message);
  }
  if (st->channels != 1 && st->channels != 3) {
    throw IoError("JPEG decode error in " + name + ": unsupported component count");
  }
  return from_interleaved_u8(st->pixels.data(), st->height, st->width, st->channels, st->channels);
}

// Baseline JPEG, ISLOW DCT, standard Huffman tables, 4:2:0 for color.
inline std::vector<std::uint8_t> encode_jpeg(const Image& img, int quality) {
  if (quality < 1 || quality > 100) {
    throw ArgumentError("encode_jpeg: quality must be in [1,100], got " + std::to_string(quality));
  }
  if (img.empty()) throw ArgumentError("encode_jpeg: empty image");
  const auto pixels = to_interleaved_u8(img);
  auto st = std::make_unique<detail::JpegEncodeState>();
  const bool ok = detail::jpeg_encode_into(st.get(), pixels.data(), img.height(), img.width(),
                                           img.channels(), quality);
  std::vector<std::uint8_t> out;
  if (st->out) {
    if (ok) out.assign(st->out, st->out + st->out_size);
    std::free(st->out);
  }
  if (!ok) throw IoError(std::string("JPEG encode error: ") + st->err.message);
  return out;
}

// Encode then decode: the lossy round trip that imprints JPEG artifacts.
inline Image jpeg_roundtrip(const Image& img, int quality) {
  return decode_jpeg(encode_jpeg(img, quality));
}

inline bool is_png(std::span<const std::uint8_t> b) {
  static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  return b.size() >= 8 && std::memcmp(b.data(), sig, 8) == 0;
}

inline bool is_jpeg(std::span<const std::uint8_t> b) {
  return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

// Format is sniffed from the file signature, not the extension.
inline Image load_image(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  if (is_png(bytes)) return decode_png(bytes, path.string());
  if (is_jpeg(bytes)) return decode_jpeg(bytes, path.string());
  throw IoError("decode error in " + path.string() + ": not a PNG or JPEG file");
}

inline bool has_image_extension(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

// Sorted list of image files directly inside `dir`.
inline std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && has_image_extension(e.path())) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace rwsr
